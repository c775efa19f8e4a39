//! Small statistics helpers for the equivalence harness: total-variation
//! distance, chi-square tests, and the regularized incomplete gamma
//! function backing the p-values.

use std::collections::HashMap;
use std::hash::Hash;

/// Total-variation distance between two empirical distributions given as
/// count maps.
pub fn total_variation<K: Eq + Hash>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return 1.0;
    }
    let keys: std::collections::HashSet<&K> = a.keys().chain(b.keys()).collect();
    let mut tv = 0.0;
    for k in keys {
        let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
        let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
        tv += (pa - pb).abs();
    }
    tv / 2.0
}

/// Pearson chi-square statistic and degrees of freedom for homogeneity of
/// two samples over a common discrete support (2 x K contingency table).
/// Cells empty in both samples are dropped.
pub fn chi_square_homogeneity<K: Eq + Hash>(
    a: &HashMap<K, u64>,
    b: &HashMap<K, u64>,
) -> (f64, usize) {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let total = (na + nb) as f64;
    let keys: std::collections::HashSet<&K> = a.keys().chain(b.keys()).collect();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for k in keys {
        let ca = *a.get(k).unwrap_or(&0) as f64;
        let cb = *b.get(k).unwrap_or(&0) as f64;
        let col = ca + cb;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        if ea > 0.0 {
            stat += (ca - ea) * (ca - ea) / ea;
        }
        if eb > 0.0 {
            stat += (cb - eb) * (cb - eb) / eb;
        }
    }
    (stat, cells.saturating_sub(1))
}

/// Chi-square statistic against the uniform distribution over `cells`
/// outcomes, with counts indexed by outcome.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    (stat, counts.len().saturating_sub(1))
}

/// Upper-tail p-value of the chi-square distribution.
pub fn chi_square_p_value(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - regularized_gamma_lower(dof as f64 / 2.0, stat / 2.0)
}

/// Regularized lower incomplete gamma P(a, x), by series for x < a + 1
/// and by Lentz's continued fraction for the complement otherwise.
pub fn regularized_gamma_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // Series expansion.
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        (sum.ln() + a * x.ln() - x - ln_gamma(a)).exp()
    } else {
        // Continued fraction for Q(a, x).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        let q = (a * x.ln() - x - ln_gamma(a)).exp() * h;
        1.0 - q
    }
}

/// Lanczos approximation of ln Gamma.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_5e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for c in COEFFS {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}
