use num_complex::Complex;

use crate::error::{Error, Result};
use crate::sigcore::{fft, ifft};

/// Minimum normalized correlation peak for a valid alignment.
pub const MIN_PEAK: f64 = 0.1;

/// Result of aligning received symbols to a transmitted sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alignment {
    /// Received position p maps to transmitted index (p − shift) mod N.
    pub shift: i64,
    pub peak: f64,
}

/// Cyclic cross-correlation of `bob` (whose element k sits at transmitted
/// position `first + k`) against the full transmitted sequence `alice`.
/// Ties between periodic repeats resolve to the smallest |shift|.
pub fn align(bob: &[Complex<f64>], first: usize, alice: &[Complex<f64>]) -> Result<Alignment> {
    let n = alice.len();
    if n == 0 || bob.is_empty() || bob.len() > n {
        return Err(Error::Mismatch(format!("{} received vs {n} transmitted symbols", bob.len())));
    }
    let mut b = vec![Complex::new(0.0, 0.0); n];
    for (k, v) in bob.iter().enumerate() {
        b[(first + k) % n] = *v;
    }
    let mut a = alice.to_vec();
    fft(&mut a);
    fft(&mut b);
    let mut r: Vec<Complex<f64>> = a.iter().zip(&b).map(|(x, y)| x.conj() * y).collect();
    ifft(&mut r);
    let eb: f64 = bob.iter().map(|x| x.norm_sqr()).sum();
    let ea: f64 = alice.iter().map(|x| x.norm_sqr()).sum::<f64>() * bob.len() as f64 / n as f64;
    let norm = (ea * eb).sqrt();
    let signed = |d: usize| if d > n / 2 { d as i64 - n as i64 } else { d as i64 };
    let mut best = (0usize, f64::NEG_INFINITY);
    for (d, v) in r.iter().enumerate() {
        let m = v.norm();
        let better =
            m > best.1 * (1.0 + 1e-9) || (m >= best.1 * (1.0 - 1e-9) && signed(d).abs() < signed(best.0).abs());
        if better {
            best = (d, m);
        }
    }
    let peak = if norm > 0.0 { best.1 / norm } else { 0.0 };
    if !(peak >= MIN_PEAK) {
        return Err(Error::Alignment(peak));
    }
    Ok(Alignment { shift: signed(best.0), peak })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize) -> Vec<Complex<f64>> {
        let mut x = 99u64;
        (0..n)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Complex::new(if x >> 63 == 1 { 1.0 } else { -1.0 }, if (x >> 62) & 1 == 1 { 1.0 } else { -1.0 })
            })
            .collect()
    }

    #[test]
    fn recovers_shift_and_rotation() {
        let a = seq(1000);
        let rot = Complex::from_polar(0.5, 1.1);
        let bob: Vec<_> = (0..900).map(|k| a[(k + 10 + 1000 - 7) % 1000] * rot).collect();
        let al = align(&bob, 10, &a).unwrap();
        assert_eq!(al.shift, 7);
        assert!(al.peak > 0.99);
    }

    #[test]
    fn uncorrelated_fails() {
        let a = seq(1000);
        let bob = vec![Complex::new(0.0, 0.0); 500];
        assert!(matches!(align(&bob, 0, &a), Err(Error::Alignment(_))));
    }

    #[test]
    fn periodic_tie_prefers_zero() {
        let base = seq(127);
        let a: Vec<_> = (0..127 * 8).map(|k| base[k % 127]).collect();
        let al = align(&a[5..900], 5, &a).unwrap();
        assert_eq!(al.shift, 0);
    }
}
