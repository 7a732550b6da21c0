//! Gray-mapped square constellations with unit average energy and
//! hard-decision demapping.
//!
//! BPSK is the real axis. QPSK, 16-QAM and 64-QAM are the product of two
//! Gray-coded PAM axes with `L = 2, 4, 8` levels; the first `m/2` bits pick the
//! in-phase level, the rest the quadrature level.

use num_complex::Complex64;

use crate::link::Constellation;
use crate::math;

fn levels_per_axis(c: Constellation) -> u32 {
    match c {
        Constellation::Null | Constellation::Bpsk => 0,
        Constellation::Qpsk => 2,
        Constellation::Qam16 => 4,
        Constellation::Qam64 => 8,
    }
}

/// Scale that gives the constellation unit average energy, applied to the
/// integer grid `±1, ±3, ...`.
fn axis_scale(levels: u32) -> f64 {
    // average energy of the square grid is 2(L²−1)/3
    let l = levels as f64;
    1.0 / math::sqrt(2.0 * (l * l - 1.0) / 3.0)
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

fn pam_level(bits: u32, levels: u32) -> f64 {
    let idx = gray_inverse(bits);
    (2 * idx) as f64 - (levels as f64 - 1.0)
}

/// Slices a received coordinate `x` against the PAM grid scaled by `amp`
/// and returns the Gray label of the decision. A zero `amp` collapses every
/// threshold onto the origin, which is the limiting decision rule as the
/// signal fades out.
fn pam_slice(x: f64, amp: f64, levels: u32) -> u32 {
    let mut idx = 0u32;
    for j in 1..levels {
        let thr = amp * ((2 * j) as f64 - levels as f64);
        if x > thr {
            idx = j;
        }
    }
    gray(idx)
}

/// Maps the low `c.bits()` bits of `bits` to a unit-energy symbol.
pub fn modulate(c: Constellation, bits: u32) -> Complex64 {
    match c {
        Constellation::Null => Complex64::new(0.0, 0.0),
        Constellation::Bpsk => Complex64::new(if bits & 1 == 0 { 1.0 } else { -1.0 }, 0.0),
        _ => {
            let levels = levels_per_axis(c);
            let half = c.bits() / 2;
            let mask = (1 << half) - 1;
            let s = axis_scale(levels);
            let i = pam_level((bits >> half) & mask, levels);
            let q = pam_level(bits & mask, levels);
            // PAM labels are MSB-first within each axis
            Complex64::new(s * i, s * q)
        }
    }
}

/// Hard decision on `r = amp·s + noise`, where `s` is a unit-energy symbol.
pub fn demodulate(c: Constellation, r: Complex64, amp: f64) -> u32 {
    match c {
        Constellation::Null => 0,
        Constellation::Bpsk => u32::from(r.re < 0.0),
        _ => {
            let levels = levels_per_axis(c);
            let half = c.bits() / 2;
            let a = amp * axis_scale(levels);
            let i = pam_slice(r.re, a, levels);
            let q = pam_slice(r.im, a, levels);
            (i << half) | q
        }
    }
}
