//! Binary waveform container and CSV export.
//!
//! Layout (little-endian): magic `CVQW`, version `u32`, sample rate `f64`,
//! sample count `u64`, then a version-specific body. Version 1 holds
//! interleaved `(re, im)` `f64` pairs. Version 2 holds a `u32` tag followed by
//! a `u32` trace count and that many real `f64` traces back to back.

use std::io::{Read, Write};

use num_complex::Complex;

use super::ComplexWaveform;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"CVQW";
pub const VERSION_COMPLEX: u32 = 1;
pub const VERSION_TRACES: u32 = 2;

fn header(out: &mut impl Write, version: u32, rate: f64, count: u64) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&version.to_le_bytes())?;
    out.write_all(&rate.to_le_bytes())?;
    out.write_all(&count.to_le_bytes())?;
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(input: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(input)?))
}

fn read_header(input: &mut impl Read, want: u32) -> Result<(f64, usize)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(input)?;
    if version != want {
        return Err(Error::Format(format!("expected version {want}, found {version}")));
    }
    let rate = read_f64(input)?;
    let count = usize::try_from(read_u64(input)?).map_err(|_| Error::Format("sample count overflows usize".into()))?;
    Ok((rate, count))
}

pub fn write_waveform<S: Scalar>(out: &mut impl Write, w: &ComplexWaveform<S>) -> Result<()> {
    header(out, VERSION_COMPLEX, w.sample_rate(), w.len() as u64)?;
    let mut buf = Vec::with_capacity(w.len() * 16);
    for s in w.samples() {
        buf.extend_from_slice(&s.re.wide().to_le_bytes());
        buf.extend_from_slice(&s.im.wide().to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_waveform<S: Scalar>(input: &mut impl Read) -> Result<ComplexWaveform<S>> {
    let (rate, count) = read_header(input, VERSION_COMPLEX)?;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let re = read_f64(input)?;
        let im = read_f64(input)?;
        samples.push(Complex::new(S::of(re), S::of(im)));
    }
    ComplexWaveform::new(samples, rate)
}

/// Writes equal-length real traces with a caller-defined tag.
pub fn write_traces(out: &mut impl Write, rate: f64, tag: u32, traces: &[&[f64]]) -> Result<()> {
    let count = traces.first().map_or(0, |t| t.len());
    if traces.iter().any(|t| t.len() != count) {
        return Err(Error::Mismatch("traces differ in length".into()));
    }
    header(out, VERSION_TRACES, rate, count as u64)?;
    out.write_all(&tag.to_le_bytes())?;
    out.write_all(&(traces.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(count * 8);
    for t in traces {
        buf.clear();
        for v in *t {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a trace container: `(rate, tag, traces)`.
pub fn read_traces(input: &mut impl Read) -> Result<(f64, u32, Vec<Vec<f64>>)> {
    let (rate, count) = read_header(input, VERSION_TRACES)?;
    let tag = read_u32(input)?;
    let n = read_u32(input)? as usize;
    let mut traces = Vec::with_capacity(n);
    for _ in 0..n {
        let mut t = Vec::with_capacity(count);
        for _ in 0..count {
            t.push(read_f64(input)?);
        }
        traces.push(t);
    }
    Ok((rate, tag, traces))
}

/// CSV with columns `index,re,im`.
pub fn write_csv<S: Scalar>(out: &mut impl Write, w: &ComplexWaveform<S>) -> Result<()> {
    writeln!(out, "index,re,im")?;
    for (i, s) in w.samples().iter().enumerate() {
        writeln!(out, "{i},{},{}", s.re.wide(), s.im.wide())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let w = ComplexWaveform::<f64>::new(vec![Complex::new(1.5, -2.0), Complex::new(0.0, 3.25)], 7.5e9).unwrap();
        let mut buf = Vec::new();
        write_waveform(&mut buf, &w).unwrap();
        assert_eq!(&buf[..4], b"CVQW");
        assert_eq!(buf.len(), 24 + 32);
        let back: ComplexWaveform<f64> = read_waveform(&mut buf.as_slice()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn traces_round_trip_and_bad_magic() {
        let a = [1.0, 2.0];
        let b = [3.0, 4.0];
        let mut buf = Vec::new();
        write_traces(&mut buf, 2.0, 7, &[&a, &b]).unwrap();
        let (rate, tag, t) = read_traces(&mut buf.as_slice()).unwrap();
        assert_eq!((rate, tag), (2.0, 7));
        assert_eq!(t, vec![a.to_vec(), b.to_vec()]);
        buf[0] = b'X';
        assert!(read_traces(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_layout() {
        let w = ComplexWaveform::<f32>::new(vec![Complex::new(0.5, 1.0)], 1.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &w).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,re,im\n0,0.5,1\n");
    }
}
