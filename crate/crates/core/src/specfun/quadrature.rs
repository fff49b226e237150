//! Adaptive Gauss-Kronrod (7/15) quadrature.

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

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 50;

/// Single 15-point panel: (Kronrod estimate, |Kronrod - Gauss|).
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
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
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, bisecting panels until each panel's error
/// estimate is below its share of `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let (whole, _) = panel(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.abs());
    recurse(&f, a, b, whole, tol, 0)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, estimate: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let (left, el) = panel(f, a, mid);
    let (right, er) = panel(f, mid, b);
    let refined = left + right;
    if depth >= MAX_DEPTH || (el + er <= tol && (refined - estimate).abs() <= 50.0 * tol) {
        return refined;
    }
    recurse(f, a, mid, left, 0.5 * tol, depth + 1) + recurse(f, mid, b, right, 0.5 * tol, depth + 1)
}
