//! Gauss–Legendre rules and a globally adaptive Gauss–Kronrod (10/21) integrator.

use once_cell::sync::Lazy;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Computes the n-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            if n == 1 {
                dp = 1.0;
                x = 0.0;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }
}

static RULES: Lazy<Vec<GaussRule>> = Lazy::new(|| (0..=64).map(|n| GaussRule::new(n.max(1))).collect());

/// Cached Gauss–Legendre rule with `n <= 64` points.
pub fn gauss(n: usize) -> &'static GaussRule {
    &RULES[n.clamp(1, 64)]
}

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
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss–Kronrod 21-point panel for a vector-valued integrand.
/// Returns the Kronrod estimate and the per-component |K - G| difference.
pub fn gk21<const K: usize, F: FnMut(f64) -> [f64; K]>(f: &mut F, a: f64, b: f64) -> ([f64; K], [f64; K]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut rk = [0.0; K];
    let mut rg = [0.0; K];
    let fc = f(c);
    for m in 0..K {
        rk[m] = WGK[10] * fc[m];
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for m in 0..K {
            let s = f1[m] + f2[m];
            rk[m] += WGK[j] * s;
            if j % 2 == 1 {
                rg[m] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; K];
    for m in 0..K {
        rk[m] *= h;
        rg[m] *= h;
        err[m] = (rk[m] - rg[m]).abs();
    }
    (rk, err)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub evaluations: usize,
}

/// Globally adaptive integration over a list of initial panels.
///
/// Bisects the panel with the largest error until every component satisfies
/// `err[m] <= abs_tol[m]` or `max_panels` is reached.
pub fn adaptive<const K: usize, F: FnMut(f64) -> [f64; K]>(
    f: &mut F,
    breaks: &[f64],
    abs_tol: [f64; K],
    max_panels: usize,
) -> Quadrature<K> {
    struct Panel<const K: usize> {
        a: f64,
        b: f64,
        val: [f64; K],
        err: [f64; K],
    }
    let mut panels: Vec<Panel<K>> = Vec::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (val, err) = gk21(f, w[0], w[1]);
            panels.push(Panel { a: w[0], b: w[1], val, err });
        }
    }
    let mut evals = 21 * panels.len();
    let score = |p: &Panel<K>| -> f64 {
        let mut s: f64 = 0.0;
        for m in 0..K {
            let t = if abs_tol[m] > 0.0 { p.err[m] / abs_tol[m] } else { 0.0 };
            s = s.max(t);
        }
        s
    };
    loop {
        let mut tot = [0.0; K];
        for p in &panels {
            for m in 0..K {
                tot[m] += p.err[m];
            }
        }
        let done = (0..K).all(|m| tot[m] <= abs_tol[m]);
        if done || panels.len() >= max_panels {
            let mut value = [0.0; K];
            for p in &panels {
                for m in 0..K {
                    value[m] += p.val[m];
                }
            }
            return Quadrature { value, error: tot, evaluations: evals };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bs), (i, p)| {
                let s = score(p);
                if s > bs {
                    (i, s)
                } else {
                    (bi, bs)
                }
            });
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk21(f, p.a, mid);
        let (v2, e2) = gk21(f, mid, p.b);
        evals += 42;
        panels.push(Panel { a: p.a, b: mid, val: v1, err: e1 });
        panels.push(Panel { a: mid, b: p.b, val: v2, err: e2 });
    }
}
