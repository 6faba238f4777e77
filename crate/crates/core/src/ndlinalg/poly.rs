use super::{schur, CMatrix, LinalgError, C64};

/// Roots of a polynomial given by ascending coefficients.
#[derive(Clone, Debug)]
pub struct PolyRoots {
    pub coefficients: Vec<C64>,
    pub roots: Vec<C64>,
    pub max_residual: f64,
}

pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn poly_deriv_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, (k, &c)| acc * x + c * k as f64)
}

/// Closed form for degree <= 2, companion-matrix Schur eigenvalues plus Newton polish above.
pub fn poly_roots(coeffs: &[C64]) -> Result<PolyRoots, LinalgError> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if coeffs.len() < 2 {
        return Err(LinalgError::ConstantPolynomial);
    }
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = *coeffs.last().unwrap();
    if lead.norm() <= 1e-14 * cmax || lead.norm() == 0.0 {
        return Err(LinalgError::DegenerateLeadingCoefficient);
    }
    let deg = coeffs.len() - 1;
    let mut roots = match deg {
        1 => vec![-coeffs[0] / coeffs[1]],
        2 => quadratic(coeffs[2], coeffs[1], coeffs[0]),
        _ => {
            let companion = CMatrix::from_fn(deg, deg, |i, j| {
                if j == deg - 1 {
                    -coeffs[i] / lead
                } else if i == j + 1 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let mut r = schur(&companion)?.1.diagonal();
            for z in r.iter_mut() {
                *z = polish(coeffs, *z);
            }
            r
        }
    };
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let max_residual = roots.iter().map(|&z| poly_eval(coeffs, z).norm()).fold(0.0, f64::max);
    Ok(PolyRoots { coefficients: coeffs.to_vec(), roots, max_residual })
}

fn quadratic(a: C64, b: C64, c: C64) -> Vec<C64> {
    let disc = (b * b - a * c * 4.0).sqrt();
    let sign = if (b.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let q = (b + disc * sign) * -0.5;
    if q.norm() == 0.0 {
        return vec![C64::new(0.0, 0.0); 2];
    }
    vec![q / a, c / q]
}

fn polish(coeffs: &[C64], mut z: C64) -> C64 {
    let mut best = poly_eval(coeffs, z).norm();
    for _ in 0..4 {
        let d = poly_deriv_eval(coeffs, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - poly_eval(coeffs, z) / d;
        let r = poly_eval(coeffs, cand).norm();
        if !(r < best) {
            break;
        }
        z = cand;
        best = r;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn simple_quadratic_and_quartic() {
        let r = poly_roots(&[c(-1.0), c(0.0), c(1.0)]).unwrap();
        assert!((r.roots[0] + 1.0).norm() < 1e-15 && (r.roots[1] - 1.0).norm() < 1e-15);
        let r = poly_roots(&[c(-1.0), c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(r.roots.len(), 4);
        for want in [c(-1.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(1.0)] {
            assert!(r.roots.iter().any(|z| (z - want).norm() < 1e-13), "{want}");
        }
    }

    #[test]
    fn zero_leading_is_rejected() {
        assert_eq!(poly_roots(&[c(1.0), c(2.0), c(0.0)]).unwrap_err(), LinalgError::DegenerateLeadingCoefficient);
    }
}
