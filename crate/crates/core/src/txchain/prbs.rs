use crate::error::{Error, Result};

/// Fibonacci LFSR pseudo-random bit sequence with ITU-T polynomials.
#[derive(Clone, Debug)]
pub struct Prbs {
    order: u32,
    tap: u32,
    state: u32,
}

impl Prbs {
    /// `seed` is reduced to a non-zero register state.
    pub fn new(order: u32, seed: u64) -> Result<Self> {
        let tap = match order {
            7 => 6,
            9 => 5,
            11 => 9,
            15 => 14,
            23 => 18,
            31 => 28,
            _ => return Err(Error::Config(format!("unsupported PRBS order {order}"))),
        };
        let period = (1u64 << order) - 1;
        let state = (seed % period + 1) as u32;
        Ok(Self { order, tap, state })
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.order) - 1
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_bit(&mut self) -> bool {
        let bit = ((self.state >> (self.order - 1)) ^ (self.state >> (self.tap - 1))) & 1;
        let mask = ((1u64 << self.order) - 1) as u32;
        self.state = ((self.state << 1) | bit) & mask;
        bit == 1
    }
}

impl Iterator for Prbs {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.next_bit())
    }
}
