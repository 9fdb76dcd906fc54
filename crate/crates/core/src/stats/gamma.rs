//! Log-gamma and the regularized incomplete gamma function, the numerical
//! core of the chi-squared upper-tail p-value.
//!
//! `ln_gamma` uses a Lanczos approximation (g = 7, 9 terms). The regularized
//! functions use the classic series / continued-fraction pair: the series for
//! `x < a + 1`, a modified Lentz continued fraction otherwise. Accuracy is
//! checked in tests against a frozen high-precision reference grid.

/// Lanczos coefficients, g = 7.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;

/// Series expansion of P(a, x), best for x < a + 1.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued fraction for Q(a, x) via modified Lentz, best for x >= a + 1.
fn gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper-tail probability of a chi-squared variate: Q(dof/2, chi2/2).
pub fn chi_squared_sf(chi2: f64, dof: f64) -> f64 {
    gamma_q(dof / 2.0, chi2 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(5) = 24, Γ(1/2) = sqrt(pi)
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(2.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
    }

    #[test]
    fn p_q_complement() {
        for &(a, x) in &[(0.5, 0.3), (1.0, 2.0), (2.5, 1.0), (15.0, 20.0), (5.0, 5.0)] {
            let s = gamma_p(a, x) + gamma_q(a, x);
            assert!((s - 1.0).abs() < 1e-14, "a={a} x={x} sum={s}");
        }
    }

    /// Frozen reference grid: (chi2, dof, Q(dof/2, chi2/2)) computed with a
    /// 50-digit arbitrary-precision evaluation of the regularized upper
    /// incomplete gamma function.
    const REFERENCE: &[(f64, u32, f64)] = &[
        (0.001, 1, 0.97477287936996039),
        (0.001, 2, 0.99950012497916927),
        (0.001, 3, 0.99999159208094195),
        (0.001, 5, 0.99999999831851228),
        (0.1, 1, 0.75182963404584928),
        (0.1, 2, 0.95122942450071401),
        (0.1, 3, 0.99183742373187648),
        (0.1, 5, 0.99983768338807738),
        (0.1, 10, 0.99999999750204866),
        (0.5, 1, 0.47950012218695346),
        (0.5, 2, 0.77880078307140487),
        (0.5, 3, 0.91889141165467586),
        (0.5, 5, 0.99212329323262959),
        (0.5, 10, 0.99999338828943897),
        (1.0, 1, 0.3173105078629141),
        (1.0, 2, 0.60653065971263342),
        (1.0, 3, 0.8012519569012008),
        (1.0, 5, 0.96256577324729637),
        (1.0, 10, 0.99982788437004416),
        (2.0, 1, 0.15729920705028513),
        (2.0, 2, 0.36787944117144232),
        (2.0, 3, 0.57240670447087983),
        (2.0, 5, 0.84914503608460964),
        (2.0, 10, 0.99634015317265629),
        (3.841, 1, 0.050013683763956705),
        (3.841, 2, 0.1465336769721013),
        (3.841, 3, 0.2791530262600009),
        (3.841, 5, 0.57252776443576949),
        (3.841, 10, 0.95423478637286416),
        (3.841, 30, 0.99999999773157313),
        (5.0, 1, 0.025347318677468264),
        (5.0, 2, 0.082084998623898795),
        (5.0, 3, 0.17179714429673314),
        (5.0, 5, 0.41588018699550792),
        (5.0, 10, 0.89117801891415124),
        (5.0, 30, 0.99999993084686133),
        (6.666666666666667, 1, 0.0098232745075192462),
        (6.666666666666667, 2, 0.035673993347252392),
        (6.666666666666667, 3, 0.083316305511201869),
        (6.666666666666667, 5, 0.24663415218605215),
        (6.666666666666667, 10, 0.75649418814152921),
        (6.666666666666667, 30, 0.99999760761864596),
        (10.0, 1, 0.0015654022580025497),
        (10.0, 2, 0.0067379469990854671),
        (10.0, 3, 0.018566135463043233),
        (10.0, 5, 0.075235246146512179),
        (10.0, 10, 0.44049328506521241),
        (10.0, 30, 0.99977374632382324),
        (20.0, 1, 7.7442164310440836e-6),
        (20.0, 2, 4.5399929762484852e-5),
        (20.0, 3, 0.00016974243555282643),
        (20.0, 5, 0.0012497305630313754),
        (20.0, 10, 0.029252688076961073),
        (20.0, 30, 0.91654152706533718),
        (50.0, 1, 1.5374597944280349e-12),
        (50.0, 2, 1.3887943864964021e-11),
        (50.0, 3, 7.9891792449514711e-11),
        (50.0, 5, 1.3857973367009593e-9),
        (50.0, 10, 2.6690834249044956e-7),
        (50.0, 30, 0.01240206071890058),
        (100.0, 1, 1.5239706048321052e-23),
        (100.0, 2, 1.9287498479639178e-22),
        (100.0, 3, 1.5541594313896049e-21),
        (100.0, 5, 5.2851483609432401e-20),
        (100.0, 10, 5.4497019829205293e-17),
        (100.0, 30, 1.8568023365102386e-9),
    ];

    #[test]
    fn chi_squared_sf_matches_reference_grid() {
        for &(chi2, dof, want) in REFERENCE {
            let got = chi_squared_sf(chi2, dof as f64);
            let abs = (got - want).abs();
            let rel = abs / want.abs().max(f64::MIN_POSITIVE);
            assert!(
                abs <= 1e-8 && rel <= 1e-10,
                "chi2={chi2} dof={dof}: got {got}, want {want} (abs {abs:.3e}, rel {rel:.3e})"
            );
        }
    }
}
