//! Small statistics helpers: medians, least-squares fits, bootstrap
//! confidence intervals. Everything is deterministic given its inputs.

use crate::rng::StreamRng;

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Ordinary least squares y = slope x + intercept; returns
/// (slope, intercept, r_squared).
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(n >= 2.0, "need at least two points to fit");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// A fitted exponent with a bootstrap confidence interval.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: Vec<(f64, f64)>,
}

/// Fit a log-log slope where each x has per-seed samples: the fit runs on
/// (log x, log median(samples)); the CI comes from bootstrap resampling the
/// seed dimension (2.5% and 97.5% quantiles of the resampled slopes).
pub fn fit_log_log_median(
    xs: &[f64],
    samples_per_x: &[Vec<f64>],
    resamples: usize,
    seed: u64,
) -> SlopeFit {
    assert_eq!(xs.len(), samples_per_x.len());
    let keep: Vec<usize> =
        (0..xs.len()).filter(|&k| !samples_per_x[k].is_empty()).collect();
    let med_points: Vec<(f64, f64)> = keep
        .iter()
        .map(|&k| {
            let mut v = samples_per_x[k].clone();
            (xs[k].ln(), median(&mut v).ln())
        })
        .collect();
    let (slope, intercept, r2) = ols(
        &med_points.iter().map(|p| p.0).collect::<Vec<_>>(),
        &med_points.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    let mut rng = StreamRng::new(seed);
    let mut boot = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut lx = Vec::with_capacity(keep.len());
        let mut ly = Vec::with_capacity(keep.len());
        for &k in &keep {
            let s = &samples_per_x[k];
            let mut draw: Vec<f64> =
                (0..s.len()).map(|_| s[rng.below(s.len() as u64) as usize]).collect();
            lx.push(xs[k].ln());
            ly.push(median(&mut draw).ln());
        }
        boot.push(ols(&lx, &ly).0);
    }
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| boot[((boot.len() - 1) as f64 * p).round() as usize];
    SlopeFit {
        slope,
        intercept,
        r_squared: r2,
        ci_low: q(0.025),
        ci_high: q(0.975),
        points: med_points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_line() {
        let xs: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        let (s, i, r2) = ols(&xs, &ys);
        assert!((s - 3.0).abs() < 1e-12);
        assert!((i - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn log_log_fit_quadratic() {
        let xs: Vec<f64> = (8..=64).step_by(8).map(|k| k as f64).collect();
        let samples: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x * x; 5]).collect();
        let fit = fit_log_log_median(&xs, &samples, 100, 7);
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!(fit.ci_low <= fit.slope && fit.slope <= fit.ci_high);
    }
}
