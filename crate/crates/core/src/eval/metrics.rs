//! Answer metrics and rank correlations.
//!
//! Answer metrics follow the normalization conventions shared by the
//! standard multi-hop QA benchmarks: lowercase, ASCII punctuation
//! stripped in place (no space inserted), English articles removed
//! token-wise, whitespace collapsed.

use super::EvalError;

/// Canonical answer form: lowercase, punctuation dropped, articles
/// ("a", "an", "the") removed, whitespace collapsed to single spaces.
pub fn normalize_answer(text: &str) -> String {
    let lower = text.to_lowercase();
    let no_punct: String = lower
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|token| !matches!(*token, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn candidates<'a>(gold: &'a str, aliases: &'a [String]) -> impl Iterator<Item = &'a str> {
    std::iter::once(gold).chain(aliases.iter().map(|a| a.as_str()))
}

/// True iff the normalized prediction equals the normalized gold answer
/// or any normalized alias.
pub fn exact_match(prediction: &str, gold: &str, aliases: &[String]) -> bool {
    let pred = normalize_answer(prediction);
    candidates(gold, aliases).any(|c| normalize_answer(c) == pred)
}

/// Token-level F1 over normalized-token multisets. Both sides empty
/// after normalization is a perfect match; exactly one empty is a miss.
pub fn token_f1(prediction: &str, gold: &str) -> f64 {
    let pred_norm = normalize_answer(prediction);
    let gold_norm = normalize_answer(gold);
    let pred: Vec<&str> = pred_norm.split_whitespace().collect();
    let gold_tokens: Vec<&str> = gold_norm.split_whitespace().collect();
    token_f1_of(&pred, &gold_tokens)
}

fn token_f1_of(pred: &[&str], gold: &[&str]) -> f64 {
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let mut gold_counts = std::collections::HashMap::new();
    for token in gold {
        *gold_counts.entry(*token).or_insert(0usize) += 1;
    }
    let mut overlap = 0usize;
    for token in pred {
        if let Some(count) = gold_counts.get_mut(token) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / pred.len() as f64;
    let recall = overlap as f64 / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// True iff the normalized gold answer (or an alias) occurs as a
/// contiguous token run inside the normalized prediction. Containment is
/// token-level, so "dodo" does not cover "dodoma". Always at least as
/// permissive as exact match.
pub fn accuracy(prediction: &str, gold: &str, aliases: &[String]) -> bool {
    let pred_norm = normalize_answer(prediction);
    let pred: Vec<&str> = pred_norm.split_whitespace().collect();
    candidates(gold, aliases).any(|c| {
        let gold_norm = normalize_answer(c);
        let gold_tokens: Vec<&str> = gold_norm.split_whitespace().collect();
        if gold_tokens.is_empty() {
            return pred.is_empty();
        }
        if gold_tokens.len() > pred.len() {
            return false;
        }
        pred.windows(gold_tokens.len()).any(|w| w == gold_tokens)
    })
}

/// Kendall's tau-b and Spearman's rho between two orderings of the same
/// id set. Inputs are rankings (best first); both coefficients use
/// average-rank tie handling, which reduces to the classic formulas when
/// every rank is distinct.
pub fn rank_correlations(
    baseline: &[String],
    test: &[String],
) -> Result<(f64, f64), EvalError> {
    if baseline.len() < 2 {
        return Err(EvalError::InsufficientInput {
            needed: 2,
            got: baseline.len(),
        });
    }
    if baseline.len() != test.len() {
        return Err(EvalError::RankingMismatch {
            message: format!(
                "rankings differ in length: {} vs {}",
                baseline.len(),
                test.len()
            ),
        });
    }
    let mut sorted_a: Vec<&String> = baseline.iter().collect();
    let mut sorted_b: Vec<&String> = test.iter().collect();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return Err(EvalError::RankingMismatch {
            message: "rankings are not over the same id set".to_string(),
        });
    }
    if sorted_a.windows(2).any(|w| w[0] == w[1]) {
        return Err(EvalError::RankingMismatch {
            message: "rankings contain duplicate ids".to_string(),
        });
    }

    // Pair each id's position in the baseline with its position in the
    // test ranking.
    let positions: std::collections::HashMap<&String, f64> = test
        .iter()
        .enumerate()
        .map(|(i, id)| (id, i as f64))
        .collect();
    let xs: Vec<f64> = (0..baseline.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = baseline.iter().map(|id| positions[id]).collect();
    Ok((kendall_tau_b(&xs, &ys), spearman_rho(&xs, &ys)))
}

/// Tie-corrected Kendall correlation over paired values.
pub(crate) fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_x = 0i64;
    let mut ties_y = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_x) as f64) * ((n0 - ties_y) as f64)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / denom
}

/// Average ranks (ties share the mean of their positions).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation: Pearson correlation of average ranks.
pub(crate) fn spearman_rho(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mean_x = rx.iter().sum::<f64>() / n;
    let mean_y = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in rx.iter().zip(&ry) {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x).powi(2);
        var_y += (y - mean_y).powi(2);
    }
    let denom = (var_x * var_y).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    cov / denom
}
