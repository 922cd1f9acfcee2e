//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 21-point Kronrod rule with the embedded 10-point Gauss rule, driven by a
//! global bisection strategy in the style of QUADPACK's QAG. Used by the
//! special-function integral representations, the real-space kernel, and the
//! verification oracles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae (non-negative half, descending); odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Value and absolute error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    /// Number of integrand evaluations.
    pub evals: usize,
    /// Whether the requested tolerance was met.
    pub converged: bool,
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            eps_abs: 1e-14,
            eps_rel: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn new(eps_abs: f64, eps_rel: f64) -> Self {
        Self {
            eps_abs,
            eps_rel,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
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
        self.err.total_cmp(&other.err)
    }
}

/// Single 21-point Gauss–Kronrod panel. Returns (value, error estimate).
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Adaptive integration over consecutive panels `[breaks[i], breaks[i+1]]`.
///
/// Breakpoints must be sorted; duplicates are skipped. The initial panels seed
/// the global error heap, so interior features such as peaks or kinks should
/// be passed here.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, err) = gk21(&mut f, a, b);
        evals += 21;
        total += value;
        total_err += err;
        heap.push(Panel { a, b, value, err });
    }
    let mut converged = false;
    loop {
        let tol = opts.eps_abs.max(opts.eps_rel * total.abs());
        if total_err <= tol {
            converged = true;
            break;
        }
        if heap.len() >= opts.max_intervals {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        // Interval no longer resolvable in floating point.
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e3 * f64::MIN_POSITIVE {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evals += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // Re-sum to shed drift from the incremental updates.
    let mut value = 0.0;
    let mut err = 0.0;
    for p in heap.iter() {
        value += p.value;
        err += p.err;
    }
    let tol = opts.eps_abs.max(opts.eps_rel * value.abs());
    QuadResult {
        value,
        abs_err: err,
        evals,
        converged: converged || err <= tol,
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Wynn's epsilon algorithm over a sequence of partial sums.
///
/// Returns the accelerated limit estimate for the sequence seen so far.
#[derive(Debug, Default, Clone)]
pub struct WynnEpsilon {
    // Last column of the epsilon table, most recent diagonal.
    row: Vec<f64>,
}

impl WynnEpsilon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Push a partial sum and return the current best estimate.
    pub fn push(&mut self, s: f64) -> f64 {
        let mut prev_col = Vec::with_capacity(self.row.len() + 1);
        prev_col.push(s);
        // eps_{-1} = 0; build the new anti-diagonal from the previous one.
        let mut aux = 0.0;
        for (k, &old) in self.row.iter().enumerate() {
            let cur = prev_col[k];
            let diff = cur - old;
            let next = if diff.abs() < f64::MIN_POSITIVE * 1e10 {
                f64::INFINITY
            } else {
                aux + 1.0 / diff
            };
            aux = old;
            prev_col.push(next);
            if !next.is_finite() {
                break;
            }
        }
        self.row = prev_col;
        self.estimate()
    }

    /// Highest-order even column entry on the latest anti-diagonal.
    pub fn estimate(&self) -> f64 {
        let mut best = self.row[0];
        let mut k = 2;
        while k < self.row.len() {
            if self.row[k].is_finite() {
                best = self.row[k];
            } else {
                break;
            }
            k += 2;
        }
        best
    }
}
