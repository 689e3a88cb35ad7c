//! Bracketed scalar minimization: golden-section search with parabolic
//! interpolation steps (Brent, 1973).

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentOptions {
    /// Absolute tolerance on the argmin; the final bracket is at most this wide
    /// (plus a relative term at machine-precision scale).
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentMinimum {
    pub x: f64,
    pub fx: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Minimizes `f` on `[lo, hi]`, assuming a single local minimum there.
pub fn brent_minimize<F>(mut f: F, lo: f64, hi: f64, opts: &BrentOptions) -> Result<BrentMinimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let rel = f64::EPSILON.sqrt() * 1e-2;
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut evaluations = 1;
    // d: last step, e: step before that
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for _ in 0..opts.max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = rel * x.abs() + opts.x_tol / 4.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(BrentMinimum {
                x,
                fx,
                lo: a,
                hi: b,
                evaluations,
            });
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            let mut q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(mid - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        evaluations += 1;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::Numeric {
        what: format!("minimizer did not converge in {} iterations", opts.max_iter),
        estimate: x,
        error: b - a,
        evaluations,
    })
}
