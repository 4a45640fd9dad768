//! Globally adaptive 21-point Gauss-Kronrod quadrature and gamma-weighted
//! expectations built on it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{abstain, Result};
use crate::numerics::{gamma_quantile, ln_gamma_pdf};

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

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_778,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const MAX_INTERVALS: usize = 4000;

/// Tail mass dropped on each side of a gamma expectation.
pub(crate) const TAIL_MASS: f64 = 1e-16;

// QUADPACK's error rescaling
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn qk21(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let x = half * XGK[jtw];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let x = half * XGK[jtwm1];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let abs_half = half.abs();
    (res_k * half, rescale_error(err, res_abs * abs_half, res_asc * abs_half))
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integral of `f` over the union of consecutive intervals given by
/// `breaks`, with the summed error estimate driven below `tol`.
///
/// Returns `(value, error_estimate)`; running out of subdivisions is an
/// abstain.
pub(crate) fn integrate(mut f: impl FnMut(f64) -> f64, breaks: &[f64], tol: f64) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = qk21(&mut f, w[0], w[1]);
            total_err += error;
            heap.push(Piece { a: w[0], b: w[1], value, error });
        }
    }
    while total_err > tol {
        if heap.len() >= MAX_INTERVALS {
            return abstain(format!("quadrature error {total_err:.3e} above tolerance {tol:.3e}"));
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return abstain("quadrature interval cannot be split further");
        }
        let (v1, e1) = qk21(&mut f, worst.a, mid);
        let (v2, e2) = qk21(&mut f, mid, worst.b);
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        // refresh the running error occasionally against drift
        if heap.len() % 64 == 0 {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok((value, error))
}

/// Expectations under Gamma(shape, 1), truncated to the central range
/// that leaves `TAIL_MASS` on each side.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GammaWeight {
    shape: f64,
    lo: f64,
    hi: f64,
}

impl GammaWeight {
    pub(crate) fn new(shape: f64) -> Self {
        let lo = gamma_quantile(shape, TAIL_MASS, false);
        let hi = gamma_quantile(shape, TAIL_MASS, true);
        GammaWeight { shape, lo, hi }
    }

    /// Support range actually integrated over.
    pub(crate) fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub(crate) fn density(&self, t: f64) -> f64 {
        ln_gamma_pdf(self.shape, t).exp()
    }

    /// `E[g(t) 1{from <= t <= to}]` for `g` valued in `[0, 1]`, with total
    /// error (quadrature plus dropped tails) at most `tol`.
    pub(crate) fn expect(&self, g: impl FnMut(f64) -> f64, from: f64, to: f64, tol: f64) -> Result<f64> {
        self.expect_split(g, from, to, &[], tol)
    }

    /// [`expect`](Self::expect) with extra points where `g` may kink.
    pub(crate) fn expect_split(
        &self,
        mut g: impl FnMut(f64) -> f64,
        from: f64,
        to: f64,
        kinks: &[f64],
        tol: f64,
    ) -> Result<f64> {
        let a = from.max(self.lo);
        let b = to.min(self.hi);
        if !(b > a) {
            return Ok(0.0);
        }
        let mut breaks = vec![a, b];
        let mode = self.shape - 1.0;
        if mode > a && mode < b {
            breaks.push(mode);
        }
        // a few interior points keep the first pass from missing narrow peaks
        let spread = self.shape.max(1.0).sqrt();
        for off in [-3.0, 3.0] {
            let x = self.shape + off * spread;
            if x > a && x < b {
                breaks.push(x);
            }
        }
        breaks.extend(kinks.iter().copied().filter(|&x| x > a && x < b));
        breaks.sort_by(f64::total_cmp);
        let (value, _) = integrate(|t| self.density(t) * g(t), &breaks, tol - 2.0 * TAIL_MASS)?;
        Ok(value.max(0.0))
    }

    /// Same as [`expect`](Self::expect) over the whole support.
    pub(crate) fn expect_all(&self, g: impl FnMut(f64) -> f64, tol: f64) -> Result<f64> {
        self.expect(g, 0.0, f64::INFINITY, tol)
    }
}
