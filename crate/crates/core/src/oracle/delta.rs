//! Exact pairing of `P(mu)` with derivatives of the delta function at `x = 0`.
//!
//! With `gamma` frozen to `gamma0` and `mu = conj(lambda)`,
//!
//! ```text
//! P(mu) delta^(k) = 4 (k + 1 + i mu) delta^(k+1) + i gamma0 (2i(k+1) - mu - i n/2) delta^(k)
//! ```
//!
//! Both sides are paired with a polynomial `phi` in exact rational arithmetic
//! using `<delta^(m), phi> = (-1)^m phi^(m)(0)`.

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Zero};

use super::OracleError;

pub type Exact = Complex<Rational64>;

/// Polynomial coefficients in increasing degree.
pub type Poly = Vec<Exact>;

fn int(v: i64) -> Exact {
    Exact::new(Rational64::from_integer(v), Rational64::zero())
}

fn imag_unit() -> Exact {
    Exact::new(Rational64::zero(), Rational64::one())
}

pub fn derivative(p: &[Exact]) -> Poly {
    p.iter().enumerate().skip(1).map(|(j, &c)| c * int(j as i64)).collect()
}

fn add(a: &[Exact], b: &[Exact]) -> Poly {
    (0..a.len().max(b.len()))
        .map(|j| a.get(j).copied().unwrap_or_else(Exact::zero) + b.get(j).copied().unwrap_or_else(Exact::zero))
        .collect()
}

fn scale(a: &[Exact], s: Exact) -> Poly {
    a.iter().map(|&c| c * s).collect()
}

fn shift_up(a: &[Exact]) -> Poly {
    std::iter::once(Exact::zero()).chain(a.iter().copied()).collect()
}

/// `phi^(m)(0)`.
fn derivative_at_zero(p: &[Exact], m: usize) -> Exact {
    let fact: i64 = (1..=m as i64).product();
    p.get(m).copied().unwrap_or_else(Exact::zero) * int(fact)
}

fn sign(m: usize) -> Exact {
    if m % 2 == 0 {
        int(1)
    } else {
        int(-1)
    }
}

/// `<delta^(m), phi>`.
pub fn delta_pairing(m: usize, phi: &[Exact]) -> Exact {
    sign(m) * derivative_at_zero(phi, m)
}

/// Formal transpose `P(mu)^T phi = -4 (x phi)'' - ((2 gamma0 x - 4 + 4 i mu) phi)' + gamma0 (n/2 - i mu) phi`.
pub fn transpose_apply(mu: Exact, gamma0: Rational64, n: u32, phi: &[Exact]) -> Poly {
    let i = imag_unit();
    let g = Exact::new(gamma0, Rational64::zero());
    let x_phi = shift_up(phi);
    let second = scale(&derivative(&derivative(&x_phi)), int(-4));
    let drift = add(&scale(&x_phi, g * int(2)), &scale(phi, int(-4) + int(4) * i * mu));
    let first = scale(&derivative(&drift), int(-1));
    let zeta = Exact::new(Rational64::new(n as i64, 2), Rational64::zero()) - i * mu;
    add(&add(&second, &first), &scale(phi, g * zeta))
}

/// Coefficients `(c_{k+1}, c_k)` of `P(mu) delta^(k)`.
pub fn delta_image_coefficients(k: usize, mu: Exact, gamma0: Rational64, n: u32) -> (Exact, Exact) {
    let i = imag_unit();
    let g = Exact::new(gamma0, Rational64::zero());
    let kp1 = int(k as i64 + 1);
    let half_n = Exact::new(Rational64::new(n as i64, 2), Rational64::zero());
    let top = int(4) * (kp1 + i * mu);
    let low = i * g * (int(2) * i * kp1 - mu - i * half_n);
    (top, low)
}

/// `(lhs, rhs)` with `lhs = <delta^(k), P(conj lambda)^T phi>` and `rhs` the pairing of
/// the closed-form image with `phi`.
pub fn delta_identity_pairing(
    k: usize,
    lambda: Exact,
    gamma0: Rational64,
    phi: &[Exact],
) -> Result<(Exact, Exact), OracleError> {
    let degree = phi.iter().rposition(|c| !c.is_zero());
    if degree.map_or(true, |d| d < k + 2) {
        return Err(OracleError::InvalidInput(format!(
            "phi must have degree at least {} for k = {k}",
            k + 2
        )));
    }
    let n = 1;
    let mu = lambda.conj();
    let lhs = delta_pairing(k, &transpose_apply(mu, gamma0, n, phi));
    let (top, low) = delta_image_coefficients(k, mu, gamma0, n);
    let rhs = top * delta_pairing(k + 1, phi) + low * delta_pairing(k, phi);
    Ok((lhs, rhs))
}

/// Leading coefficient `k + 1 - conj(lambda)/i`, up to the factor 4.
pub fn leading_coefficient(k: usize, lambda: Exact) -> Exact {
    int(k as i64 + 1) + imag_unit() * lambda.conj()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: i64, im: i64) -> Exact {
        Exact::new(Rational64::from_integer(re), Rational64::from_integer(im))
    }

    fn monomial(d: usize) -> Poly {
        let mut p = vec![c(0, 0); d + 1];
        p[d] = c(1, 0);
        p
    }

    #[test]
    fn spec_fixtures() {
        let (l, r) = delta_identity_pairing(0, c(0, 1), Rational64::zero(), &monomial(2)).unwrap();
        assert_eq!(l, r);
        let (l, r) = delta_identity_pairing(1, c(0, 2), Rational64::from_integer(-2), &monomial(3)).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn generic_polynomial() {
        let phi = vec![c(3, -1), c(-2, 5), c(7, 0), c(1, 1), c(0, -4), c(2, 3)];
        for k in 0..3 {
            for lambda in [c(0, 1), c(1, 1), c(-3, 2)] {
                let g = Rational64::new(-7, 3);
                let (l, r) = delta_identity_pairing(k, lambda, g, &phi).unwrap();
                assert_eq!(l, r);
            }
        }
    }

    #[test]
    fn low_degree_is_rejected() {
        assert!(delta_identity_pairing(1, c(0, 1), Rational64::zero(), &monomial(2)).is_err());
    }

    #[test]
    fn leading_coefficient_nonzero_in_upper_half_plane() {
        for k in 0..3 {
            for lambda in [c(0, 1), c(0, 2), c(1, 1), c(-5, 1)] {
                assert!(!leading_coefficient(k, lambda).is_zero());
            }
        }
        assert!(leading_coefficient(0, c(0, -1)).is_zero());
    }
}
