//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! This is the deterministic oracle the Monte Carlo checks are compared
//! against, so it deliberately shares no code with the samplers.

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod_panel(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    evaluations: &mut usize,
) -> (f64, f64) {
    let (value, error) = kronrod_panel(f, a, b);
    *evaluations += 15;
    if error <= tol || depth >= MAX_DEPTH {
        return (value, error);
    }
    let mid = 0.5 * (a + b);
    let (lv, le) = adapt(f, a, mid, 0.5 * tol, depth + 1, evaluations);
    let (rv, re) = adapt(f, mid, b, 0.5 * tol, depth + 1, evaluations);
    (lv + rv, le + re)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Integral {
    let mut evaluations = 0;
    let (value, error) = adapt(&mut f, a, b, abs_tol, 0, &mut evaluations);
    Integral {
        value,
        error,
        evaluations,
    }
}

/// Iterated adaptive integration over the box `lower[i]..upper[i]`.
///
/// Cost grows geometrically with the dimension; callers keep it to d <= 3.
pub fn integrate_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lower: &[f64],
    upper: &[f64],
    abs_tol: f64,
) -> f64 {
    assert_eq!(lower.len(), upper.len());
    let mut point = vec![0.0; lower.len()];
    nested(&mut f, lower, upper, abs_tol, 0, &mut point)
}

fn nested(
    f: &mut dyn FnMut(&[f64]) -> f64,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
    axis: usize,
    point: &mut Vec<f64>,
) -> f64 {
    if axis == lower.len() {
        return f(point);
    }
    let inner_tol = tol / (upper[axis] - lower[axis]).max(1.0);
    integrate(
        |x| {
            point[axis] = x;
            nested(f, lower, upper, inner_tol, axis + 1, point)
        },
        lower[axis],
        upper[axis],
        tol,
    )
    .value
}
