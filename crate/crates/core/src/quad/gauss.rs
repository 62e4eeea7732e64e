use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::specfun::ln_gamma_unchecked;

/// Nodes and weights of an n-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Applies the rule on [a, b] (Legendre-type rules only).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

/// Gauss–Legendre rule by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss–Legendre rules for the orders used on hot paths.
pub fn legendre_cached(n: usize) -> &'static Rule {
    static R8: OnceLock<Rule> = OnceLock::new();
    static R16: OnceLock<Rule> = OnceLock::new();
    static R32: OnceLock<Rule> = OnceLock::new();
    static R64: OnceLock<Rule> = OnceLock::new();
    match n {
        8 => R8.get_or_init(|| gauss_legendre(8)),
        16 => R16.get_or_init(|| gauss_legendre(16)),
        32 => R32.get_or_init(|| gauss_legendre(32)),
        64 => R64.get_or_init(|| gauss_legendre(64)),
        _ => panic!("no cached Gauss-Legendre rule of order {n}"),
    }
}

/// Gauss–Jacobi rule for the weight (1-τ)^a (1+τ)^b on [-1, 1], a, b > -1,
/// computed by Golub–Welsch.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma_unchecked(a + 1.0)
        + ln_gamma_unchecked(b + 1.0)
        - ln_gamma_unchecked(a + b + 2.0))
    .exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss–Kronrod 7/15 panel: (kronrod value, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    super::record_evals(15);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Abscissae of the 15-point Kronrod rule on [a, b] together with its weights.
pub fn gk15_nodes(a: f64, b: f64) -> ([f64; 15], [f64; 15], [f64; 15]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    x[7] = c;
    wk[7] = WGK[7] * h;
    wg[7] = WG[3] * h;
    for j in 0..7 {
        x[j] = c - h * XGK[j];
        x[14 - j] = c + h * XGK[j];
        wk[j] = WGK[j] * h;
        wk[14 - j] = WGK[j] * h;
        if j % 2 == 1 {
            wg[j] = WG[j / 2] * h;
            wg[14 - j] = WG[j / 2] * h;
        }
    }
    (x, wk, wg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate { value: 0.0, error: 0.0, evals: 0, converged: true }
    }

    pub fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature over [a, b] split at `breaks`.
///
/// Stops when the summed error estimate is below max(abs_tol, rel_tol·|I|)
/// or the evaluation budget is exhausted.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Estimate {
    if !(b > a) {
        return Estimate::zero();
    }
    let mut pts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    inner.dedup();
    pts.extend(inner);
    pts.push(b);

    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        total += v;
        total_err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            return Estimate { value: total, error: total_err, evals, converged: true };
        }
        if evals + 30 > max_evals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            // cannot split further; keep its contribution and give up on it
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
    }
    // recompute the sum from the panels to shed accumulated rounding
    let (mut v, mut e) = (0.0, 0.0);
    for p in heap.iter() {
        v += p.value;
        e += p.error;
    }
    let tol = abs_tol.max(rel_tol * v.abs());
    Estimate { value: v, error: e, evals, converged: e <= tol }
}

/// Adaptive quadrature over a union of disjoint intervals.
pub fn adaptive_union<F: FnMut(f64) -> f64>(
    mut f: F,
    intervals: &[(f64, f64)],
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Estimate {
    let mut acc = Estimate::zero();
    let share = (max_evals / intervals.len().max(1)).max(60);
    for &(a, b) in intervals {
        acc = acc.add(adaptive(&mut f, a, b, breaks, rel_tol, abs_tol, share));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(10);
        let v = r.integrate(0.0, 2.0, |x| x.powi(19));
        assert_relative_eq!(v, 2f64.powi(20) / 20.0, max_relative = 1e-13);
        assert_relative_eq!(r.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_moments() {
        let (a, b) = (-0.5, 0.5);
        let r = gauss_jacobi(20, a, b);
        // ∫ (1-τ)^{-1/2}(1+τ)^{1/2} dτ = π
        assert_relative_eq!(r.weights.iter().sum::<f64>(), std::f64::consts::PI, max_relative = 1e-13);
        // ∫ τ (1-τ)^{-1/2}(1+τ)^{1/2} dτ = π/2
        let m1: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x * w).sum();
        assert_relative_eq!(m1, std::f64::consts::FRAC_PI_2, max_relative = 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let s = 0.2;
        let est = adaptive(|x: f64| x.powf(-2.0 * s), 0.0, 1.0, &[], 1e-10, 0.0, 200_000);
        assert!(est.converged);
        assert_relative_eq!(est.value, 1.0 / (1.0 - 2.0 * s), max_relative = 1e-9);
    }
}
