//! Bivariate normal CDF after Genz's BVND (Drezner-Wesolowsky quadrature with
//! Gauss-Legendre rules chosen by |rho|), accurate to about 1e-15.

use core::f64::consts::PI;

use crate::normal::cdf;

const X6: [f64; 3] = [-0.932_469_514_203_152_1, -0.661_209_386_466_264_5, -0.238_619_186_083_197];
const W6: [f64; 3] = [0.171_324_492_379_170_3, 0.360_761_573_048_138_4, 0.467_913_934_572_691];
const X12: [f64; 6] = [
    -0.981_560_634_246_719_1,
    -0.904_117_256_370_475,
    -0.769_902_674_194_305,
    -0.587_317_954_286_617_1,
    -0.367_831_498_998_180_2,
    -0.125_233_408_511_469_2,
];
const W12: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const X20: [f64; 10] = [
    -0.993_128_599_185_094_9,
    -0.963_971_927_277_913_8,
    -0.912_234_428_251_325_9,
    -0.839_116_971_822_218_8,
    -0.746_331_906_460_150_8,
    -0.636_053_680_726_515,
    -0.510_867_001_950_827_1,
    -0.373_706_088_715_419_6,
    -0.227_785_851_141_645_1,
    -0.076_526_521_133_497_33,
];
const W20: [f64; 10] = [
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
];

/// `P[X <= a, Y <= b]` for standard normals with correlation `rho`.
pub fn bivariate_normal_cdf(a: f64, b: f64, rho: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return 0.0;
    }
    if a == f64::INFINITY {
        return cdf(b);
    }
    if b == f64::INFINITY {
        return cdf(a);
    }
    let rho = rho.clamp(-1.0, 1.0);
    if rho == 1.0 {
        return cdf(a.min(b));
    }
    if rho == -1.0 {
        return (cdf(a) + cdf(b) - 1.0).max(0.0);
    }
    upper_orthant(-a, -b, rho).clamp(0.0, 1.0)
}

/// `P[X > h, Y > k]`.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    let (xs, ws): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&X6, &W6)
    } else if r.abs() < 0.75 {
        (&X12, &W12)
    } else {
        (&X20, &W20)
    };
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = libm::asin(r);
        for (&x, &w) in xs.iter().zip(ws) {
            for sign in [-1.0, 1.0] {
                let sn = libm::sin(0.5 * asr * (1.0 + sign * x));
                bvn += w * libm::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return bvn * asr / (4.0 * PI) + cdf(-h) * cdf(-k);
    }

    let k = if r < 0.0 {
        hk = -hk;
        -k
    } else {
        k
    };
    let as_ = (1.0 - r) * (1.0 + r);
    let mut a = libm::sqrt(as_);
    let bs = (h - k) * (h - k);
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    bvn = a
        * libm::exp(-0.5 * (bs / as_ + hk))
        * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
    if hk > -160.0 {
        let b = libm::sqrt(bs);
        bvn -=
            libm::exp(-0.5 * hk) * libm::sqrt(2.0 * PI) * cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (&x, &w) in xs.iter().zip(ws) {
        for sign in [-1.0, 1.0] {
            let xs2 = (a * (sign * x + 1.0)) * (a * (sign * x + 1.0));
            let rs = libm::sqrt(1.0 - xs2);
            let asr = -0.5 * (bs / xs2 + hk);
            if asr > -100.0 {
                bvn += a
                    * w
                    * libm::exp(asr)
                    * (libm::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs2 * (1.0 + d * xs2)));
            }
        }
    }
    bvn = -bvn / (2.0 * PI);
    if r > 0.0 {
        bvn + cdf(-h.max(k))
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += cdf(k) - cdf(h);
            } else {
                bvn += cdf(-h) - cdf(-k);
            }
        }
        bvn
    }
}
