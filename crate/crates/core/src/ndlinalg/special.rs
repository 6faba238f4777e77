//! Bessel functions of integer order, log-factorials and Gauss-Legendre rules.

/// `ln n!`
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `(ln |J_n(x)|, sign J_n(x))` for `x >= 0`.
///
/// Power series when `x^2 <= 2(n+1)` (terms then decrease monotonically from the first),
/// Miller's backward recurrence normalised by `J_0 + 2 sum J_2k = 1` otherwise.
pub fn bessel_j_log(n: u32, x: f64) -> (f64, f64) {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    if x == 0.0 {
        return if n == 0 { (0.0, 1.0) } else { (f64::NEG_INFINITY, 0.0) };
    }
    if x * x <= 2.0 * (n as f64 + 1.0) {
        let (log_s, sign) = bessel_series_sum(n, x);
        return (n as f64 * (0.5 * x).ln() - ln_factorial(n as u64) + log_s, sign);
    }
    miller(n, x)
}

/// `ln |sum_k (-1)^k (x/2)^{2k} / (k! (n+1)_k)|` and its sign.
pub fn bessel_series_sum(n: u32, x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1u64;
    loop {
        term *= -q / (k as f64 * (n as f64 + k as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() || k > 10_000 {
            break;
        }
        k += 1;
    }
    (sum.abs().ln(), sum.signum())
}

fn miller(n: u32, x: f64) -> (f64, f64) {
    let big = (n as f64).max(x);
    let start = (big + 30.0 + (40.0 * big).sqrt()).ceil() as usize;
    let start = start + start % 2;
    let mut j_next = 0.0f64;
    let mut j_cur = 1e-300f64;
    let mut norm = 0.0f64;
    // Target kept as (log|value|, sign) relative to the running scale of the recurrence.
    let mut target: Option<(f64, f64)> = None;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let idx = k - 1;
        if idx == n as usize {
            target = Some((j_cur.abs().ln(), j_cur.signum()));
        }
        norm += match idx {
            0 => j_cur,
            i if i % 2 == 0 => 2.0 * j_cur,
            _ => 0.0,
        };
        if j_cur.abs() > 1e250 {
            let f = 1e-250f64;
            j_cur *= f;
            j_next *= f;
            norm *= f;
            if let Some((l, _)) = target.as_mut() {
                *l += f.ln();
            }
        }
    }
    match target {
        Some((l, s)) if l.is_finite() => (l - norm.abs().ln(), s * norm.signum()),
        _ => (f64::NEG_INFINITY, 0.0),
    }
}

/// Plain `J_n(x)`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let (l, s) = bessel_j_log(n, x);
    s * l.exp()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for k in 1..=n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p2) / k as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        // Tabulated: J0(1), J1(1), J5(10), J10(1), J2(30)
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (5, 10.0, -0.234_061_528_186_793_6),
            (10, 1.0, 2.630_615_123_687_453e-10),
            (2, 30.0, 0.078_451_246_073_265_38),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-13 * want.abs().max(1e-3), "J{n}({x}) = {got}");
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_the_switch() {
        for n in [0u32, 3, 20] {
            let x = (2.0 * (n as f64 + 1.0)).sqrt();
            let (ls, ss) = bessel_j_log(n, x);
            let (lm, sm) = miller(n, x);
            assert_eq!(ss, sm);
            assert!((ls - lm).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(100);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(198)).sum();
        assert!((s - 2.0 / 199.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }
}
