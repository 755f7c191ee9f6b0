//! Complex log-gamma (Lanczos) and digamma.

use std::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` on some branch; only `exp` of it and differences modulo `2 pi i` are meaningful.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// `1 / Gamma(z)`, entire; exactly zero at the poles of `Gamma`.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

/// `psi(z) = Gamma'(z) / Gamma(z)`.
pub fn digamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pz = Complex64::new(PI, 0.0) * z;
        return digamma(Complex64::new(1.0, 0.0) - z) - PI * pz.cos() / pz.sin();
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 12.0 {
        acc -= 1.0 / w;
        w += 1.0;
    }
    let w2 = (w * w).inv();
    // Bernoulli tail B_2k / (2k w^2k) for k = 1..7.
    const TAIL: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = w2;
    for c in TAIL {
        series += c * p;
        p *= w2;
    }
    acc + w.ln() - 0.5 / w - series
}
