//! Deterministic counter-based random number generation.
//!
//! Reproducibility is a hard contract for this crate: identical seeds must
//! produce bit-identical sample sequences across runs, platforms, and
//! worker counts. We therefore use a self-contained SplitMix64 generator
//! (a mixed 64-bit counter) instead of an external RNG crate, and sample
//! Gaussians through the inverse normal CDF rather than rejection or
//! Box-Muller, so every draw consumes exactly one counter tick.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_K1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_K2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 finalizer: a bijective avalanche mix of a 64-bit word.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_K1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_K2);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a master seed and one index.
pub fn split_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index.wrapping_mul(GOLDEN_GAMMA))
}

/// Counter-based PRNG state. Cheap to create, trivially splittable, and
/// never shared between trial workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    state: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval (0, 1); safe for inverse-CDF input.
    #[inline]
    pub fn next_open_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n) by multiply-shift reduction.
    #[inline]
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Standard normal via the inverse CDF.
    #[inline]
    pub fn next_standard_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_open_f64())
    }

    /// Uniform direction on the unit sphere in R^d: d i.i.d. standard
    /// normals, normalized.
    pub fn unit_sphere(&mut self, d: usize) -> crate::linalg::UnitVector {
        loop {
            let mut v = Vec::with_capacity(d);
            for _ in 0..d {
                v.push(self.next_standard_normal());
            }
            // The norm of d >= 1 Gaussians is zero with probability zero,
            // but the loop keeps the contract airtight.
            if let Ok(u) = crate::linalg::normalize(&crate::linalg::Vector::from_vec(v)) {
                return u;
            }
        }
    }
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximations); absolute error below 1e-15 over (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[inline]
fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    let mut acc = coeffs[7];
    for &c in coeffs[..7].iter().rev() {
        acc = acc * x + c;
    }
    acc
}

// AS 241 PPND16 coefficient tables (constant term first).
const A: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];
