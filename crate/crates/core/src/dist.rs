//! Scalar distribution functions shared by the modelling modules.
//!
//! Normal, chi-squared(1) and gamma distribution functions, the gamma
//! quantile, and rectangle probabilities of the multivariate normal up to
//! three dimensions in closed form (plus a seeded Monte Carlo fallback).

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile (Wichura's AS 241). Returns ±∞ at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&AS241_A, r) / poly(&AS241_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&AS241_C, r) / poly(&AS241_D, r)
    } else {
        let r = r - 5.0;
        poly(&AS241_E, r) / poly(&AS241_F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const AS241_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545e3,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

/// Distribution function of a chi-squared variable with one degree of freedom.
pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    libm::erf((x / 2.0).sqrt())
}

/// Gamma distribution function, shape `a` and rate `b`.
pub fn gamma_cdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    gamma_lr(a, b * x)
}

/// Gamma density, shape `a` and rate `b`.
pub fn gamma_pdf(x: f64, a: f64, b: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match a.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => b,
            _ => 0.0,
        };
    }
    (a * b.ln() + (a - 1.0) * x.ln() - b * x - ln_gamma(a)).exp()
}

/// Gamma quantile, shape `a` and rate `b`.
///
/// Halley iteration on the standard gamma inside a maintained bracket,
/// started from the Wilson–Hilferty approximation.
pub fn gamma_quantile(p: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let lg = ln_gamma(a);
    let mut x = {
        let z = normal_quantile(p);
        let c = 1.0 / (9.0 * a);
        let wh = a * (1.0 - c + z * c.sqrt()).powi(3);
        if a < 1.0 || wh <= 0.0 {
            // small-x expansion F(x) ~ x^a / Gamma(a + 1)
            ((p.ln() + ln_gamma(a + 1.0)) / a).exp()
        } else {
            wh
        }
    };
    if !x.is_finite() || x <= 0.0 {
        x = a;
    }
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let f = gamma_lr(a, x) - p;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = ((a - 1.0) * x.ln() - x - lg).exp();
        let mut next = if dens > 0.0 && dens.is_finite() {
            let t = f / dens;
            let halley = t / (1.0 - 0.5 * t * ((a - 1.0) / x - 1.0)).max(0.5);
            x - halley
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x.max(lo) + 1.0
            };
        }
        let step = (next - x).abs();
        x = next;
        if step <= 1e-14 * x.max(1e-300) {
            break;
        }
    }
    x / b
}

/// Trigamma function ψ'(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x
        + x2 / 2.0
        + (1.0 / x)
            * x2
            * (1.0 / 6.0
                - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 * (1.0 / 30.0 - x2 * 5.0 / 66.0))))
}

pub use statrs::function::gamma::digamma;

const GL6: ([f64; 3], [f64; 3]) = (
    [
        0.171_324_492_379_170_5,
        0.360_761_573_048_138_4,
        0.467_913_934_572_690_4,
    ],
    [
        0.932_469_514_203_152_2,
        0.661_209_386_466_264_7,
        0.238_619_186_083_197,
    ],
);
const GL12: ([f64; 6], [f64; 6]) = (
    [
        0.047_175_336_386_511_77,
        0.106_939_325_995_318_3,
        0.160_078_328_543_346_4,
        0.203_167_426_723_065_9,
        0.233_492_536_538_354_7,
        0.249_147_045_813_402_9,
    ],
    [
        0.981_560_634_246_719_1,
        0.904_117_256_370_475,
        0.769_902_674_194_305,
        0.587_317_954_286_617_1,
        0.367_831_498_998_180_2,
        0.125_233_408_511_469_2,
    ],
);
const GL20: ([f64; 10], [f64; 10]) = (
    [
        0.017_614_007_139_152_12,
        0.040_601_429_800_386_94,
        0.062_672_048_334_109_06,
        0.083_276_741_576_704_75,
        0.101_930_119_817_240_4,
        0.118_194_531_961_518_4,
        0.131_688_638_449_176_6,
        0.142_096_109_318_382_1,
        0.149_172_986_472_603_7,
        0.152_753_387_130_725_9,
    ],
    [
        0.993_128_599_185_094_9,
        0.963_971_927_277_913_8,
        0.912_234_428_251_326,
        0.839_116_971_822_218_8,
        0.746_331_906_460_150_8,
        0.636_053_680_726_515,
        0.510_867_001_950_827_1,
        0.373_706_088_715_419_6,
        0.227_785_851_141_645_1,
        0.076_526_521_133_497_33,
    ],
);

/// Upper bivariate normal probability P(X > h, Y > k) for standard margins
/// with correlation `r` (Drezner–Wesolowsky with Genz's refinements).
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return normal_cdf(-k);
    }
    if k == f64::NEG_INFINITY {
        return normal_cdf(-h);
    }
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6.0, &GL6.1)
    } else if r.abs() < 0.75 {
        (&GL12.0, &GL12.1)
    } else {
        (&GL20.0, &GL20.1)
    };
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for (wi, xi) in w.iter().zip(x) {
            for sgn in [-1.0, 1.0] {
                let sn = (asr * (1.0 + sgn * xi) / 2.0).sin();
                bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / (4.0 * PI) + normal_cdf(-h) * normal_cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let as_ = (1.0 - r) * (1.0 + r);
            let mut a = as_.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            bvn = a
                * (-(bs / as_ + hk) / 2.0).exp()
                * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
            if hk > -160.0 {
                let b = bs.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * (2.0 * PI).sqrt()
                    * normal_cdf(-b / a)
                    * b
                    * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for (wi, xi) in w.iter().zip(x) {
                for sgn in [-1.0, 1.0] {
                    let xs = (a * (sgn * xi + 1.0)).powi(2);
                    let rs = (1.0 - xs).sqrt();
                    bvn += a
                        * wi
                        * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                            - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
            bvn = -bvn / (2.0 * PI);
        }
        if r > 0.0 {
            bvn += normal_cdf(-h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 {
                normal_cdf(k) - normal_cdf(h)
            } else {
                normal_cdf(-h) - normal_cdf(-k)
            };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// P(X < a, Y < b) for a standard bivariate normal pair with correlation `r`.
pub fn bvn_cdf(a: f64, b: f64, r: f64) -> f64 {
    bvn_upper(-a, -b, r)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// P(X1 < a1, X2 < a2, X3 < a3) for a standard trivariate normal with
/// correlation matrix `r` (only the off-diagonal entries are read).
///
/// Integrates the normal density times the conditional bivariate probability
/// over the conditioning coordinate with composite Gauss–Legendre.
pub fn tvn_cdf(a: [f64; 3], r: &[[f64; 3]; 3]) -> f64 {
    // condition on the coordinate least correlated with the others
    let score = |i: usize| {
        (0..3)
            .filter(|&j| j != i)
            .map(|j| r[i][j].abs())
            .fold(0.0, f64::max)
    };
    let c = (0..3)
        .min_by(|&i, &j| score(i).total_cmp(&score(j)))
        .unwrap();
    let (o1, o2) = match c {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let (r1, r2, r12) = (r[c][o1], r[c][o2], r[o1][o2]);
    let s1 = (1.0 - r1 * r1).max(0.0).sqrt();
    let s2 = (1.0 - r2 * r2).max(0.0).sqrt();
    const TAIL: f64 = 9.0;
    let hi = a[c].min(TAIL);
    if hi <= -TAIL {
        return 0.0;
    }
    let rc = if s1 > 0.0 && s2 > 0.0 {
        ((r12 - r1 * r2) / (s1 * s2)).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let cond = |x: f64| -> f64 {
        let lim = |ai: f64, ri: f64, si: f64| {
            if si > 0.0 {
                (ai - ri * x) / si
            } else if ai - ri * x >= 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        };
        bvn_cdf(lim(a[o1], r1, s1), lim(a[o2], r2, s2), rc)
    };
    let (nodes, weights) = gauss_legendre(20);
    let panels = 36;
    let width = (hi + TAIL) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = -TAIL + p as f64 * width;
        for (t, w) in nodes.iter().zip(&weights) {
            let x = lo + 0.5 * width * (t + 1.0);
            total += 0.5 * width * w * normal_pdf(x) * cond(x);
        }
    }
    total.clamp(0.0, 1.0)
}

/// Number of Monte Carlo draws for rectangle probabilities above three dimensions.
pub const MVN_MC_DRAWS: usize = 100_000;
const MVN_MC_SEED: u64 = 0x5eed_f1c0;

/// P(X < upper) componentwise for X ~ N(mean, cov).
///
/// Exact up to three dimensions; beyond that a seeded Monte Carlo
/// (Genz–Hajivassiliou–Keane) estimate over [`MVN_MC_DRAWS`] draws.
pub fn mvn_lower_prob(mean: &[f64], cov: &DMatrix<f64>, upper: f64) -> f64 {
    let d = mean.len();
    let sd: Vec<f64> = (0..d).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let z: Vec<f64> = (0..d)
        .map(|i| {
            if sd[i] > 0.0 {
                (upper - mean[i]) / sd[i]
            } else if upper > mean[i] {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let corr = |i: usize, j: usize| {
        if sd[i] > 0.0 && sd[j] > 0.0 {
            (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    };
    match d {
        0 => 1.0,
        1 => normal_cdf(z[0]),
        2 => bvn_cdf(z[0], z[1], corr(0, 1)),
        3 => {
            let r: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { 1.0 } else { corr(i, j) })
            });
            tvn_cdf([z[0], z[1], z[2]], &r)
        }
        _ => {
            let l = match cov.clone().cholesky() {
                Some(c) => c.l(),
                None => return f64::NAN,
            };
            // sequential conditioning with common uniforms: smooth in mean and cov
            let mut rng = ChaCha8Rng::seed_from_u64(MVN_MC_SEED);
            let mut y = vec![0.0; d];
            let mut total = 0.0;
            for _ in 0..MVN_MC_DRAWS {
                let mut prob = 1.0;
                for i in 0..d {
                    let shift: f64 = (0..i).map(|j| l[(i, j)] * y[j]).sum();
                    let e = normal_cdf((upper - mean[i] - shift) / l[(i, i)]);
                    prob *= e;
                    if i + 1 < d {
                        let w: f64 = rand::Rng::random(&mut rng);
                        y[i] = normal_quantile((w * e).clamp(1e-300, 1.0 - 1e-16));
                    }
                }
                total += prob;
            }
            total / MVN_MC_DRAWS as f64
        }
    }
}

/// Kolmogorov–Smirnov distance between a sample and the uniform law on [0, 1].
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut v: Vec<f64> = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
