//! Shared helpers for the integration suites: an exhaustive stability
//! oracle, independent of the library's matching loop and blocking-pair
//! checker, plus a least-squares goodness-of-fit helper.
//!
//! Each test binary uses its own subset of these.
#![allow(dead_code)]

/// One enumerated assignment: `assign[k]` is the participant holding RB `k`.
pub type Assignment = Vec<Option<usize>>;

fn allocated(assign: &Assignment, rates: &[Vec<f64>], tau: f64, a: usize) -> f64 {
    assign
        .iter()
        .enumerate()
        .filter(|(_, holder)| **holder == Some(a))
        .map(|(k, _)| rates[a][k] * tau)
        .sum()
}

/// Saturation semantics: every held RB must still be needed — dropping any
/// single one leaves its holder short of its remaining bits.
pub fn respects_saturation(
    assign: &Assignment,
    rates: &[Vec<f64>],
    remaining: &[f64],
    tau: f64,
) -> bool {
    assign.iter().enumerate().all(|(k, holder)| match holder {
        None => true,
        Some(a) => allocated(assign, rates, tau, *a) - rates[*a][k] * tau < remaining[*a],
    })
}

/// Mutual-deviation check written straight from the utility definitions: an
/// app deviates toward a positive-rate RB if it still needs bits or holds a
/// strictly worse RB; an RB deviates toward a strictly higher-rate app (or
/// any positive-rate app when idle).
pub fn has_blocking_pair(
    assign: &Assignment,
    rates: &[Vec<f64>],
    remaining: &[f64],
    tau: f64,
) -> bool {
    let n = rates.len();
    let k2 = assign.len();
    for a in 0..n {
        let alloc = allocated(assign, rates, tau, a);
        for k in 0..k2 {
            if assign[k] == Some(a) {
                continue;
            }
            let r = rates[a][k];
            if r <= 0.0 {
                continue;
            }
            let holds_worse = (0..k2).any(|k2i| assign[k2i] == Some(a) && rates[a][k2i] < r);
            let app_deviates = alloc < remaining[a] || holds_worse;
            let rb_deviates = match assign[k] {
                None => true,
                Some(b) => rates[b][k] < r,
            };
            if app_deviates && rb_deviates {
                return true;
            }
        }
    }
    false
}

/// All stable matchings of a small instance by brute force: every
/// assignment of RBs to (participant | idle), filtered to those that are
/// individually rational under the saturation semantics and admit no
/// blocking pair.
pub fn enumerate_stable(rates: &[Vec<f64>], remaining: &[f64], tau: f64) -> Vec<Assignment> {
    let n = rates.len();
    let k2 = rates.first().map_or(0, Vec::len);
    let total = (n + 1).pow(k2 as u32);
    let mut stable = Vec::new();
    for code in 0..total {
        let mut c = code;
        let assign: Assignment = (0..k2)
            .map(|_| {
                let digit = c % (n + 1);
                c /= n + 1;
                (digit > 0).then(|| digit - 1)
            })
            .collect();
        if respects_saturation(&assign, rates, remaining, tau)
            && !has_blocking_pair(&assign, rates, remaining, tau)
        {
            stable.push(assign);
        }
    }
    stable
}

/// Coefficient of determination of the best least-squares line through
/// `(x, y)` points. Constant data counts as a perfect fit.
pub fn linear_fit_r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sst: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sst == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    1.0 - ssr / sst
}
