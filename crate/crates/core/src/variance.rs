//! Asymptotic and quenched variances of sampled sums.
//!
//! `σ²(f) = 2 Σ_x G(0,x) c_f(x) − c_f(0)` and, on a fixed path,
//! `σ_n²(f) = Σ_z α(n,z) c_f(z)`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::process::{covariance_table, CovarianceTable, Observable, ProcessModel};
use crate::walk::{green_exact, local_time, sample_path, GreenTable, LocalTimeField, StepLaw, Transience, WalkPath};

/// Bound on the neglected part of the Green-weighted sum.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionRow {
    pub lag: i64,
    pub green: f64,
    pub covariance: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub sigma_n2_over_n: f64,
    pub target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub sigma2: f64,
    /// Lags `−X..=X` were summed explicitly.
    pub truncation: i64,
    /// Bound on `2 Σ_{|x|>X} G(0,x)|c_f(x)|`.
    pub residual_tail: f64,
    /// Propagated Monte Carlo error of the Green table, zero when exact.
    pub green_std_error: f64,
    pub degenerate: bool,
    pub table: Vec<ContributionRow>,
    pub empirical: Vec<ConvergencePoint>,
}

/// `2·G(0,0)·Σ_{x>X}|c(x)|` bounds both sides of the neglected sum since
/// `G(0,x) ≤ G(0,0)`.
fn residual(g00: f64, cov: &CovarianceTable, x: usize) -> f64 {
    2.0 * 2.0 * g00 * cov.tail_abs_bound(x)
}

/// Smallest `X` whose residual is below `TRUNCATION_TOLERANCE`, searched up to `limit`.
fn auto_truncation(g00: f64, cov: &CovarianceTable, limit: usize) -> Option<usize> {
    if residual(g00, cov, limit) >= TRUNCATION_TOLERANCE {
        return None;
    }
    let (mut lo, mut hi) = (0usize, limit);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if residual(g00, cov, mid) < TRUNCATION_TOLERANCE {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// `σ²(f)` from a Green table and a covariance table.
///
/// With `truncation = None` the smallest admissible `X` inside the table is
/// used; an explicit `X` must also leave a residual below tolerance.
pub fn sigma2_asymptotic(
    green: &GreenTable,
    cov: &CovarianceTable,
    truncation: Option<usize>,
) -> Result<VarianceReport> {
    if !cov.is_summable() {
        return Err(Error::Divergent("covariance table is not absolutely summable".into()));
    }
    let g00 = green.get(0).ok_or_else(|| domain("Green table must contain the origin"))?;
    let covered = green.lo.unsigned_abs().min(green.hi().max(0) as u64) as usize;
    if green.lo > 0 {
        return Err(domain("Green table must contain the origin"));
    }
    let x = match truncation {
        Some(x) => {
            if x > covered {
                return Err(domain(format!("truncation {x} exceeds the Green table range")));
            }
            x
        }
        None => auto_truncation(g00, cov, covered).ok_or_else(|| Error::Truncation {
            tail_bound: residual(g00, cov, covered),
            tolerance: TRUNCATION_TOLERANCE,
        })?,
    };
    let residual_tail = residual(g00, cov, x);
    if residual_tail >= TRUNCATION_TOLERANCE {
        return Err(Error::Truncation { tail_bound: residual_tail, tolerance: TRUNCATION_TOLERANCE });
    }

    let x = x as i64;
    let mut table = Vec::with_capacity(2 * x as usize + 1);
    let mut total = 0.0;
    let mut err2 = 0.0;
    for lag in -x..=x {
        let g = green.get(lag).expect("covered lag");
        let c = cov.at(lag);
        let contribution = g * c;
        total += contribution;
        err2 += (green.std_error(lag).unwrap_or(0.0) * c).powi(2);
        table.push(ContributionRow { lag, green: g, covariance: c, contribution });
    }
    let sigma2 = 2.0 * total - cov.at(0);
    Ok(VarianceReport {
        sigma2,
        truncation: x,
        residual_tail,
        green_std_error: 2.0 * err2.sqrt(),
        degenerate: sigma2 <= residual_tail,
        table,
        empirical: Vec::new(),
    })
}

/// `σ²(f)` for a law with a closed-form Green function.
pub fn sigma2_for_law(law: &StepLaw, cov: &CovarianceTable) -> Result<VarianceReport> {
    if !cov.is_summable() {
        return Err(Error::Divergent("covariance table is not absolutely summable".into()));
    }
    let g00 = green_exact(law, 0, 0)?.values[0];
    let limit = 1usize << 24;
    let x = auto_truncation(g00, cov, limit)
        .ok_or_else(|| Error::Truncation { tail_bound: residual(g00, cov, limit), tolerance: TRUNCATION_TOLERANCE })?;
    let green = green_exact(law, -(x as i64), x as i64)?;
    sigma2_asymptotic(&green, cov, Some(x))
}

/// Lags beyond this one contribute less than `1e-16·max|c|` in total.
fn empirical_cutoff(ltf: &LocalTimeField, cov: &CovarianceTable) -> usize {
    let (lo, hi) = ltf.span();
    let width = (hi - lo) as usize;
    let scale = cov.explicit().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let pairs = (ltf.n as f64 + 1.0).powi(2);
    cov.cutoff(1e-16 * scale / pairs).min(width)
}

/// `σ_n²(f) = Σ_z α(n,z) c_f(z)` on the fixed path.
pub fn sigma_n_empirical(ltf: &LocalTimeField, cov: &CovarianceTable) -> f64 {
    let cut = empirical_cutoff(ltf, cov) as i64;
    let mut total = ltf.self_intersection(0) as f64 * cov.at(0);
    for z in 1..=cut {
        let c = cov.at(z);
        if c != 0.0 {
            total += 2.0 * ltf.self_intersection(z) as f64 * c;
        }
    }
    total
}

/// `(n, σ_n²(f)/n)` along one nested path of length `max(n_grid)`.
pub fn variance_convergence(
    model: &ProcessModel,
    f: &Observable,
    law: &StepLaw,
    n_grid: &[usize],
    seed: u64,
) -> Result<Vec<ConvergencePoint>> {
    let cov = covariance_table(model, f)?;
    convergence_for_table(&cov, law, n_grid, seed)
}

/// As [`variance_convergence`] for an explicit covariance table.
pub fn convergence_for_table(
    cov: &CovarianceTable,
    law: &StepLaw,
    n_grid: &[usize],
    seed: u64,
) -> Result<Vec<ConvergencePoint>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid[0] == 0 {
        return Err(domain("n-grid must be positive and strictly increasing"));
    }
    let target = sigma2_for_law(law, cov).ok().map(|r| r.sigma2);
    let path = sample_path(law, *n_grid.last().expect("non-empty"), seed, Transience::Required)?;
    Ok(n_grid
        .iter()
        .map(|&n| {
            let ltf = local_time(&path.prefix(n));
            ConvergencePoint { n, sigma_n2_over_n: sigma_n_empirical(&ltf, cov) / n as f64, target }
        })
        .collect())
}

/// Closed form of `σ²(h − h∘T)` for the nearest-neighbour walk with
/// `p ∈ (1/2, 1]`:
/// `2(1−p)/p·c(0) + 2c(1) − 2 Σ_{x≥1} (p−q)q^{x−1}/p^{x+1}·c(x)`.
pub fn cocycle_variance(h_cov: &CovarianceTable, p: f64) -> Result<f64> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(domain(format!("cocycle variance needs p in (1/2, 1], got {p}")));
    }
    if !h_cov.is_summable() {
        return Err(Error::Divergent("covariance table is not absolutely summable".into()));
    }
    let q = 1.0 - p;
    let mut sum = 0.0;
    let mut coef = (p - q) / (p * p);
    let ratio = q / p;
    let mut x = 1usize;
    loop {
        sum += coef * h_cov.at(x as i64);
        let rest = coef * ratio / (1.0 - ratio) * h_cov.sup_abs_beyond(x);
        if rest < 1e-18 * (1.0 + sum.abs()) || coef == 0.0 {
            break;
        }
        coef *= ratio;
        x += 1;
    }
    Ok(2.0 * q / p * h_cov.at(0) + 2.0 * h_cov.at(1) - 2.0 * sum)
}

/// `C Σ a_i²` with `C = s + 2√s·θ` bounding `Var(Σ a_i η_i)`.
pub fn lemma_maj1_bound(weights: &[f64], second_moment_sup: f64, theta_sum: f64) -> Result<f64> {
    if !(second_moment_sup >= 0.0) || !(theta_sum >= 0.0) {
        return Err(domain("second-moment bound and θ-sum must be non-negative"));
    }
    let c = second_moment_sup + 2.0 * second_moment_sup.sqrt() * theta_sum;
    Ok(c * weights.iter().map(|w| w * w).sum::<f64>())
}

/// `Σ_{x,y} N(x)N(y)c(x−y)` for visits at times in the half-open block `[k, n)`.
pub fn block_quadratic_form(path: &WalkPath, k: usize, n: usize, cov: &CovarianceTable) -> Result<f64> {
    if k > n || n > path.positions.len() {
        return Err(domain(format!("invalid block [{k}, {n})")));
    }
    if k == n {
        return Ok(0.0);
    }
    let mut sites = path.positions[k..n].to_vec();
    sites.sort_unstable();
    let mut entries: Vec<(i64, u64)> = Vec::new();
    for x in sites {
        match entries.last_mut() {
            Some(e) if e.0 == x => e.1 += 1,
            _ => entries.push((x, 1)),
        }
    }
    let ltf = LocalTimeField { n: n - k - 1, entries, max_abs_position: 0 };
    let (lo, hi) = ltf.span();
    let mut total = ltf.self_intersection(0) as f64 * cov.at(0);
    for z in 1..=(hi - lo) {
        total += 2.0 * ltf.self_intersection(z) as f64 * cov.at(z);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::CovarianceTail;
    use crate::walk::green_mc;
    use proptest::prelude::*;

    fn brute_form(path: &WalkPath, cov: &CovarianceTable) -> f64 {
        let ltf = local_time(path);
        let mut total = 0.0;
        for &(x, nx) in &ltf.entries {
            for &(y, ny) in &ltf.entries {
                total += (nx * ny) as f64 * cov.at(x - y);
            }
        }
        total
    }

    #[test]
    fn ar1_nearest_neighbour_value() {
        // independent re-summation of 2[2Σ_{x≥0}0.5^x + 2Σ_{x≤−1}3^x 0.5^{−x}] − 1
        let mut pos = 0.0;
        let mut neg = 0.0;
        for x in 0..200 {
            pos += 0.5f64.powi(x);
        }
        for x in 1..200 {
            neg += (1.0f64 / 3.0).powi(x) * 0.5f64.powi(x);
        }
        let oracle = 2.0 * (2.0 * pos + 2.0 * neg) - 1.0;
        assert!((oracle - 7.8).abs() < 1e-12);
        let cov = CovarianceTable::geometric(1.0, 0.5).unwrap();
        let law = StepLaw::nearest_neighbour(0.75).unwrap();
        let r = sigma2_for_law(&law, &cov).unwrap();
        assert!((r.sigma2 - oracle).abs() < 1e-9, "{}", r.sigma2);
        assert!(!r.degenerate);
        let sum: f64 = r.table.iter().map(|row| row.contribution).sum();
        assert!((r.sigma2 - (2.0 * sum - cov.at(0))).abs() < 1e-15);
    }

    #[test]
    fn martingale_case() {
        let cov = CovarianceTable::white(2.0);
        let law = StepLaw::nearest_neighbour(0.9).unwrap();
        let r = sigma2_for_law(&law, &cov).unwrap();
        assert!((r.sigma2 - 1.5 * 2.0).abs() < 1e-12);
        let zero = sigma2_for_law(&law, &CovarianceTable::white(0.0)).unwrap();
        assert_eq!(zero.sigma2, 0.0);
        assert!(zero.degenerate);
    }

    #[test]
    fn divergent_and_truncation_errors() {
        let cov = CovarianceTable::new(vec![1.0, 0.5], CovarianceTail::PowerLaw { exponent: 0.8 }).unwrap();
        let law = StepLaw::nearest_neighbour(0.75).unwrap();
        assert!(matches!(sigma2_for_law(&law, &cov), Err(Error::Divergent(_))));
        let slow = CovarianceTable::geometric(1.0, 0.99).unwrap();
        let green = green_exact(&law, -10, 10).unwrap();
        assert!(matches!(sigma2_asymptotic(&green, &slow, None), Err(Error::Truncation { .. })));
    }

    #[test]
    fn monte_carlo_green_propagates_error() {
        let law = StepLaw::nearest_neighbour(0.75).unwrap();
        let cov = CovarianceTable::geometric(1.0, 0.5).unwrap();
        let green = green_mc(&law, -40, 40, 400, 4000, 11).unwrap();
        let r = sigma2_asymptotic(&green, &cov, None).unwrap();
        assert!(r.green_std_error > 0.0);
        assert!((r.sigma2 - 7.8).abs() < 5.0 * r.green_std_error + 1e-6);
    }

    #[test]
    fn empirical_examples() {
        let path = WalkPath::from_positions(vec![0, 1, 0, 1, 2]).unwrap();
        let ltf = local_time(&path);
        assert_eq!(sigma_n_empirical(&ltf, &CovarianceTable::white(1.0)), 9.0);

        let n = 50usize;
        let rho = 0.7f64;
        let path = sample_path(&StepLaw::delta(1), n, 0, Transience::Required).unwrap();
        let cov = CovarianceTable::geometric(1.0, rho).unwrap();
        let expect: f64 =
            (-(n as i64)..=n as i64).map(|z| (n as f64 + 1.0 - z.abs() as f64) * rho.powi(z.abs() as i32)).sum();
        let got = sigma_n_empirical(&local_time(&path), &cov);
        assert!((got - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn convergence_for_zero_observable() {
        let law = StepLaw::nearest_neighbour(0.9).unwrap();
        let pts = convergence_for_table(&CovarianceTable::white(0.0), &law, &[10, 100], 3).unwrap();
        assert!(pts.iter().all(|p| p.sigma_n2_over_n == 0.0));
        assert!(convergence_for_table(&CovarianceTable::white(1.0), &law, &[10, 10], 3).is_err());
    }

    #[test]
    fn cocycle_examples() {
        assert_eq!(cocycle_variance(&CovarianceTable::white(3.0), 1.0).unwrap(), 0.0);
        assert_eq!(cocycle_variance(&CovarianceTable::white(0.0), 0.75).unwrap(), 0.0);
        assert!(cocycle_variance(&CovarianceTable::white(1.0), 0.5).is_err());

        // both expressions, evaluated independently for c_h(x) = ρ^|x|
        let (rho, p) = (0.6f64, 0.75f64);
        let q = 1.0 - p;
        let g = |x: i64| if x >= 0 { 1.0 / (p - q) } else { (q / p).powi((-x) as i32) / (p - q) };
        let c = |x: i64| rho.powi(x.abs() as i32);
        let mut general = -2.0 * c(0) + 2.0 * c(1);
        for x in -400i64..=400 {
            general += 2.0 * (2.0 * g(x) - g(x + 1) - g(x - 1)) * c(x);
        }
        let mut simple = -2.0 * (p - 1.0) / p * c(0) + 2.0 * c(1);
        for x in 1..400 {
            simple -= 2.0 * (p - q) / (p * q) * (q / p).powi(x) * c(x as i64);
        }
        assert!((general - simple).abs() < 1e-12);
        let got = cocycle_variance(&CovarianceTable::geometric(1.0, rho).unwrap(), p).unwrap();
        assert!((got - simple).abs() < 1e-12);
    }

    #[test]
    fn maj1_examples() {
        assert_eq!(lemma_maj1_bound(&[1.0, 1.0, 1.0], 1.0, 0.0).unwrap(), 3.0);
        assert_eq!(lemma_maj1_bound(&[0.0; 4], 2.0, 1.0).unwrap(), 0.0);
        assert!(lemma_maj1_bound(&[1.0], -1.0, 0.0).is_err());
    }

    #[test]
    fn positivity_guard() {
        for p in [0.55, 0.75, 0.99] {
            let law = StepLaw::nearest_neighbour(p).unwrap();
            assert!(sigma2_for_law(&law, &CovarianceTable::white(0.1)).unwrap().sigma2 > 0.0);
        }
    }

    fn mixed_law() -> impl Strategy<Value = StepLaw> {
        prop_oneof![
            (0.55f64..0.95).prop_map(|p| StepLaw::nearest_neighbour(p).unwrap()),
            Just(StepLaw::new(vec![-1, 1, 2], vec![0.3, 0.3, 0.4]).unwrap()),
            Just(StepLaw::new(vec![-2, 0, 1, 3], vec![0.2, 0.3, 0.3, 0.2]).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn identity_matches_double_sum(law in mixed_law(), n in 1usize..300, seed in any::<u64>(), rho in -0.9f64..0.9) {
            let path = sample_path(&law, n, seed, Transience::Required).unwrap();
            let cov = CovarianceTable::new(vec![1.0, 0.4, -0.2], CovarianceTail::Geometric { ratio: rho }).unwrap();
            let a = sigma_n_empirical(&local_time(&path), &cov);
            let b = brute_form(&path, &cov);
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            let white = CovarianceTable::white(1.0);
            prop_assert_eq!(sigma_n_empirical(&local_time(&path), &white), brute_form(&path, &white));
        }

        #[test]
        fn cocycle_closed_form_matches_general(rho in -0.9f64..0.9, p in 0.51f64..1.0) {
            let h = CovarianceTable::geometric(1.0, rho).unwrap();
            let simple = cocycle_variance(&h, p).unwrap();
            let general = sigma2_for_law(&StepLaw::nearest_neighbour(p).unwrap(), &h.difference().unwrap()).unwrap();
            prop_assert!((simple - general.sigma2).abs() < 1e-8, "{} vs {}", simple, general.sigma2);
        }

        #[test]
        fn superadditive_blocks(law in mixed_law(), n in 3usize..200, split in 0.0f64..1.0, seed in any::<u64>(), rho in 0.0f64..0.9) {
            let path = sample_path(&law, n, seed, Transience::Required).unwrap();
            let len = path.positions.len();
            let k = 0;
            let m = ((len as f64) * split) as usize;
            let cov = CovarianceTable::geometric(1.0, rho).unwrap();
            let whole = block_quadratic_form(&path, k, len, &cov).unwrap();
            let parts = block_quadratic_form(&path, k, m, &cov).unwrap() + block_quadratic_form(&path, m, len, &cov).unwrap();
            prop_assert!(whole >= parts - 1e-9 * whole.abs().max(1.0));
        }
    }
}
