//! Adaptive Gauss-Kronrod (7/15-point) integration on finite intervals.

#![allow(clippy::excessive_precision)]

// QUADPACK qk15 abscissae and weights, non-negative half.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Integral {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Integral {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` by recursive bisection until each panel's
/// Kronrod-Gauss discrepancy is below its share of `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    let whole = gk15(f, a, b);
    refine(f, a, b, whole, abs_tol, 0)
}

/// Like [`integrate`] but splits the interval at the given interior points
/// first. Points outside `(a, b)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> Integral {
    let mut knots: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.insert(0, a);
    knots.push(b);
    let panels = (knots.len() - 1) as f64;
    knots.windows(2).fold(Integral { value: 0.0, error: 0.0 }, |acc, w| {
        let part = integrate(f, w[0], w[1], abs_tol / panels);
        Integral {
            value: acc.value + part.value,
            error: acc.error + part.error,
        }
    })
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: Integral, tol: f64, depth: u32) -> Integral {
    if whole.error <= tol || depth >= MAX_DEPTH {
        return whole;
    }
    let mid = 0.5 * (a + b);
    if mid <= a || mid >= b {
        return whole;
    }
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    // Both halves already agree with the parent to within tolerance.
    if left.error + right.error <= tol {
        return Integral {
            value: left.value + right.value,
            error: left.error + right.error,
        };
    }
    let l = refine(f, a, mid, left, 0.5 * tol, depth + 1);
    let r = refine(f, mid, b, right, 0.5 * tol, depth + 1);
    Integral {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // Kronrod 15 integrates degree 22 exactly.
        let r = integrate(&|x: f64| x.powi(10) - 3.0 * x.powi(3), -1.0, 2.0, 1e-12);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn sharp_step_with_breaks() {
        let step = |x: f64| if x < 0.3 { 0.0 } else { 1.0 };
        let r = integrate_with_breaks(&step, 0.0, 1.0, &[0.3], 1e-12);
        assert!((r.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn gaussian_over_wide_range() {
        let g = |x: f64| (-0.5 * x * x).exp();
        let r = integrate(&g, -40.0, 40.0, 1e-13);
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }
}
