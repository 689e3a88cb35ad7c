//! Complementary error function.
//!
//! [`erfc_exact`] is a port of the FreeBSD `s_erf.c` rational approximations
//! (via the Go standard library). It carries the original notice:
//!
//! ```text
//! Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//!
//! Developed at SunPro, a Sun Microsystems, Inc. business.
//! Permission to use, copy, modify, and distribute this
//! software is freely granted, provided that this notice
//! is preserved.
//! ```
//!
//! [`erfc_tsay`] is the two-parameter exponential approximation
//! `erfc(x) ≈ exp(-c1·x - c2·x²)`. It is never used implicitly; callers
//! that want it must ask for it.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

const ERX: f64 = 8.45062911510467529297e-01;

// erf on [0, 0.84375]
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

// erf on [0.84375, 1.25]
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

// erfc on [1.25, 1/0.35]
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

// erfc on [1/0.35, 28]
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

// 2**-56
const TINY: f64 = 1.387_778_780_781_445_7e-17;

/// Complementary error function, accurate to a few ulp over the whole line.
///
/// Fails with a domain error on NaN or infinite input.
pub fn erfc_exact(x: f64) -> Result<f64> {
    ensure!(x.is_finite(), "erfc argument must be finite, got {x}");
    Ok(erfc_unchecked(x))
}

pub(crate) fn erfc_unchecked(x: f64) -> f64 {
    let negative = x < 0.0;
    let x = x.abs();

    if x < 0.84375 {
        let t = if x < TINY {
            x
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if x < 0.25 {
                x + x * y
            } else {
                0.5 + (x * y + (x - 0.5))
            }
        };
        return if negative { 1.0 + t } else { 1.0 - t };
    }

    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if negative {
            1.0 + ERX + p / q
        } else {
            1.0 - ERX - p / q
        };
    }

    if x >= 28.0 {
        return if negative { 2.0 } else { 0.0 };
    }
    if negative && x > 6.0 {
        return 2.0;
    }

    let s = 1.0 / (x * x);
    let (r, q) = if x < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s
                * (SA1 + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // x truncated to 20 mantissa bits so that z*z is exact
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let e = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / q).exp();
    if negative {
        2.0 - e / x
    } else {
        e / x
    }
}

/// Coefficients of the exponential erfc approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsayCoefficients {
    pub c1: f64,
    pub c2: f64,
}

impl TsayCoefficients {
    pub const PUBLISHED: Self = Self {
        c1: 1.09500814703333,
        c2: 0.75651138383854,
    };

    pub fn eval(&self, x: f64) -> Result<f64> {
        ensure!(x >= 0.0, "exponential erfc approximation needs x >= 0, got {x}");
        Ok((-self.c1 * x - self.c2 * x * x).exp())
    }
}

impl Default for TsayCoefficients {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

/// `exp(-c1·x - c2·x²)` with the published coefficients. Only defined for `x >= 0`.
pub fn erfc_tsay(x: f64) -> Result<f64> {
    TsayCoefficients::PUBLISHED.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30+ digit reference values (mpmath, 40 digits working precision)
    const REFERENCE: &[(f64, f64)] = &[
        (-3.0, 1.999977909503001414558627),
        (-0.5, 1.520499877813046537682747),
        (0.1, 0.8875370839817151077967249),
        (0.3, 0.671373240540872572361086),
        (0.5, 0.4795001221869534623172533),
        (0.84375, 0.2327743387676583665410218),
        (1.0, 0.1572992070502851306587793649),
        (1.1, 0.1197949304259183002281322),
        (2.0, 0.004677734981047265837930744),
        (2.5, 0.0004069520174449589395642157),
        (3.0, 0.00002209049699858544137277613),
        (4.5, 1.96616044154288747627916e-10),
        (5.9, 7.190409783550508289852969e-17),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(x, want) in REFERENCE {
            let got = erfc_exact(x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-14, "erfc({x}) = {got:e}, want {want:e}, rel {rel:e}");
        }
    }

    #[test]
    fn special_values() {
        assert_eq!(erfc_exact(0.0).unwrap(), 1.0);
        let at_ten = erfc_exact(10.0).unwrap();
        assert!(at_ten > 0.0 && at_ten < 1e-40);
        assert!((at_ten / 2.088487583762544757000786e-45 - 1.0).abs() < 1e-13);
        assert!(erfc_exact(f64::NAN).is_err());
        assert!(erfc_exact(f64::INFINITY).is_err());
    }

    #[test]
    fn strictly_decreasing() {
        // erfc rounds to 2 below about -5.9
        let mut prev = erfc_exact(-8.0).unwrap();
        for i in 1..=16_000 {
            let x = -8.0 + i as f64 * 1e-3;
            let v = erfc_exact(x).unwrap();
            if x > -4.0 {
                assert!(v < prev, "not decreasing at {x}");
            } else {
                assert!(v <= prev, "increasing at {x}");
            }
            prev = v;
        }
    }

    #[test]
    fn tsay_values() {
        assert_eq!(erfc_tsay(0.0).unwrap(), 1.0);
        let at_one = erfc_tsay(1.0).unwrap();
        assert!((at_one - 0.1569984210215676564438964).abs() < 1e-15);
        assert!((at_one / erfc_exact(1.0).unwrap() - 1.0).abs() < 0.01);
        assert!(erfc_tsay(-0.1).is_err());
    }

    #[test]
    fn tsay_accuracy_envelope() {
        for i in 0..1000 {
            let x = 6.0 * i as f64 / 999.0;
            let exact = erfc_exact(x).unwrap();
            let approx = erfc_tsay(x).unwrap();
            assert!((approx - exact).abs() <= 2.5e-3, "abs error at {x}");
            if x <= 1.2 {
                let ratio = approx / exact;
                assert!((0.99..=1.01).contains(&ratio), "ratio {ratio} at {x}");
            }
        }
    }

    #[test]
    fn tsay_coefficients_round_trip() {
        let text = serde_json::to_string(&TsayCoefficients::PUBLISHED).unwrap();
        let back: TsayCoefficients = serde_json::from_str(&text).unwrap();
        assert_eq!(back.c1.to_bits(), 1.09500814703333f64.to_bits());
        assert_eq!(back.c2.to_bits(), 0.75651138383854f64.to_bits());
    }
}
