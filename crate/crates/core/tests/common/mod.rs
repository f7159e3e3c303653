#![allow(dead_code)]

use isomech::Family;
use statrs::function::gamma::ln_gamma;

/// Least-squares projection onto `{v : v[perm[0]] >= v[perm[1]] >= ...}` by
/// enumerating every split of the sorted sequence into contiguous pools.
pub fn brute_force_projection(x: &[f64], perm: &[usize]) -> Vec<f64> {
    let n = x.len();
    let sorted: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cuts in 0u32..(1 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let mut start = 0;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                let seg = &sorted[start..end];
                let avg = seg.iter().sum::<f64>() / seg.len() as f64;
                fitted.extend(std::iter::repeat_n(avg, seg.len()));
                start = end;
            }
        }
        if fitted.windows(2).any(|w| w[0] < w[1]) {
            continue;
        }
        let sse: f64 = fitted.iter().zip(&sorted).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|b| sse < b.0) {
            best = Some((sse, fitted));
        }
    }
    let fitted = best.expect("a single pool is always feasible").1;
    let mut out = vec![0.0; n];
    for (k, &i) in perm.iter().enumerate() {
        out[i] = fitted[k];
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn ln_choose(m: u32, x: u32) -> f64 {
    ln_gamma(m as f64 + 1.0) - ln_gamma(x as f64 + 1.0) - ln_gamma((m - x) as f64 + 1.0)
}

/// KL(p_θ1 ‖ p_θ2) from the densities: quadrature for continuous families,
/// direct summation for discrete ones.
pub fn kl_oracle(family: &Family, t1: f64, t2: f64) -> f64 {
    match *family {
        Family::Gaussian { sigma_sq } => {
            let (m1, m2) = (sigma_sq * t1, sigma_sq * t2);
            let sd = sigma_sq.sqrt();
            let logp = |x: f64, m: f64| {
                -0.5 * (2.0 * std::f64::consts::PI * sigma_sq).ln() - (x - m).powi(2) / (2.0 * sigma_sq)
            };
            simpson(
                |x| logp(x, m1).exp() * (logp(x, m1) - logp(x, m2)),
                m1 - 14.0 * sd,
                m1 + 14.0 * sd,
                40_000,
            )
        }
        Family::Binomial { m } => {
            let p = |t: f64| 1.0 / (1.0 + (-t).exp());
            let logp = |x: u32, t: f64| {
                let q = p(t);
                ln_choose(m, x) + x as f64 * q.ln() + (m - x) as f64 * (1.0 - q).ln()
            };
            (0..=m)
                .map(|x| logp(x, t1).exp() * (logp(x, t1) - logp(x, t2)))
                .sum()
        }
        Family::Poisson => {
            let (l1, l2) = (t1.exp(), t2.exp());
            let logp = |x: u32, l: f64| x as f64 * l.ln() - l - ln_gamma(x as f64 + 1.0);
            (0..=200u32)
                .map(|x| logp(x, l1).exp() * (logp(x, l1) - logp(x, l2)))
                .sum()
        }
        Family::Gamma { m } => {
            // shape m, rate −θ; integrate over u = ln x
            let logp = |x: f64, t: f64| m * (-t).ln() - ln_gamma(m) + (m - 1.0) * x.ln() + t * x;
            let centre = (m / -t1).ln();
            simpson(
                |u| {
                    let x = u.exp();
                    logp(x, t1).exp() * x * (logp(x, t1) - logp(x, t2))
                },
                centre - 10.0 - 40.0 / m,
                centre + 5.0,
                200_000,
            )
        }
    }
}

/// Empirical mean, variance and their standard errors.
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    let var = m2 / (n - 1.0);
    let m4 = m4 / n;
    Moments {
        mean,
        var,
        se_mean: (var / n).sqrt(),
        se_var: ((m4 - var * var).max(0.0) / n).sqrt(),
    }
}

/// Families used across the property suites, each with a box of natural
/// parameters well inside the domain.
pub fn families() -> Vec<(Family, (f64, f64))> {
    vec![
        (Family::gaussian(1.5).unwrap(), (-3.0, 3.0)),
        (Family::binomial(10).unwrap(), (-3.5, 3.5)),
        (Family::poisson(), ((0.5f64).ln(), (20.0f64).ln())),
        (Family::gamma(2.5).unwrap(), (-4.0, -0.25)),
    ]
}

/// Means for truthfulness experiments: distinct, separated, inside the
/// family's mean range.
pub fn mean_box(family: &Family) -> (f64, f64) {
    match family {
        Family::Gaussian { .. } => (0.0, 6.0),
        Family::Binomial { m } => (1.0, *m as f64 - 1.0),
        Family::Poisson => (1.0, 9.0),
        Family::Gamma { .. } => (1.0, 9.0),
    }
}
