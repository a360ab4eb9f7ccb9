//! Gray-mapped square QAM with unit average symbol energy.
//!
//! A symbol carries `log2(order)` bits, most significant first. The first
//! half of the bits selects the in-phase level and the second half the
//! quadrature level. On each axis the label is Gray-decoded to a level index
//! `i` and mapped to the amplitude `(L - 1) - 2i`, so the axis tables are:
//!
//! ```text
//! 4-QAM  (1 bit/axis):  0 -> +1, 1 -> -1
//! 16-QAM (2 bits/axis): 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3
//! 64-QAM (3 bits/axis): 000 -> +7, 001 -> +5, 011 -> +3, 010 -> +1,
//!                       110 -> -1, 111 -> -3, 101 -> -5, 100 -> -7
//! ```
//!
//! Amplitudes are divided by `sqrt(2(L² - 1)/3)`; e.g. 4-QAM bits `00` map to
//! `(1 + j)/√2`. Constellation point `k` is the point whose label, read as a
//! binary number, equals `k`.

use crate::{Complex64, ComplexVector, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationAlphabet {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
}

impl ModulationAlphabet {
    /// Supported orders are 4, 16 and 64.
    pub fn new(order: usize) -> Result<Self> {
        let bits_per_symbol = match order {
            4 => 2,
            16 => 4,
            64 => 6,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported QAM order {order}"
                )))
            }
        };
        let axis_bits = bits_per_symbol / 2;
        let levels = 1usize << axis_bits;
        let norm = (2.0 * ((levels * levels) as f64 - 1.0) / 3.0).sqrt();
        let amplitude = |label: usize| {
            let index = gray_decode(label);
            ((levels - 1) as f64 - 2.0 * index as f64) / norm
        };
        let mask = levels - 1;
        let points = (0..order)
            .map(|k| Complex64::new(amplitude(k >> axis_bits), amplitude(k & mask)))
            .collect();
        Ok(Self {
            order,
            bits_per_symbol,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Constellation points indexed by their bit label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Index of the nearest point; ties go to the lower index.
    pub fn nearest(&self, symbol: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let d = (symbol - p).norm_sqr();
            if d < best_dist {
                best = k;
                best_dist = d;
            }
        }
        best
    }
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Maps bits to symbols, `bits_per_symbol` bits at a time.
pub fn qam_modulate(bits: &[bool], alphabet: &ModulationAlphabet) -> Result<ComplexVector> {
    let per = alphabet.bits_per_symbol;
    if !bits.len().is_multiple_of(per) {
        return Err(Error::BitCount {
            bits: bits.len(),
            per_symbol: per,
        });
    }
    Ok(ComplexVector::from_iterator(
        bits.len() / per,
        bits.chunks(per).map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            alphabet.points[label]
        }),
    ))
}

/// Minimum-distance hard decision.
pub fn qam_demodulate(symbols: &ComplexVector, alphabet: &ModulationAlphabet) -> Vec<bool> {
    let per = alphabet.bits_per_symbol;
    let mut bits = Vec::with_capacity(symbols.len() * per);
    for s in symbols.iter() {
        let label = alphabet.nearest(*s);
        bits.extend((0..per).rev().map(|shift| (label >> shift) & 1 == 1));
    }
    bits
}
