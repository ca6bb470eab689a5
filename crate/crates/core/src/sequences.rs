//! Point families: Kronecker, van der Corput, the uniform grid, lacunary
//! `{2^k alpha}`, i.i.d. uniforms and randomly thinned Kronecker sequences.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{out_of_range, Error, Result};
use crate::irrational::{frac_part_scaled, IrrationalSpec, Precision};
use crate::point::{FixedFrac, Point};

/// Largest exponent accepted by [`lacunary`].
pub const LACUNARY_MAX: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Kronecker,
    Vdc,
    UniformGrid,
    Extremal,
    IidUniform,
    RandomSubseq,
    Lacunary,
    Manual,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::Kronecker => "kronecker",
            Provenance::Vdc => "vdc",
            Provenance::UniformGrid => "uniform-grid",
            Provenance::Extremal => "extremal",
            Provenance::IidUniform => "iid-uniform",
            Provenance::RandomSubseq => "random-subseq",
            Provenance::Lacunary => "lacunary",
            Provenance::Manual => "manual",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub provenance: Provenance,
    pub params: BTreeMap<String, String>,
}

impl PointSet {
    pub fn new(points: Vec<Point>, provenance: Provenance) -> Self {
        Self {
            points,
            provenance,
            params: BTreeMap::new(),
        }
    }

    pub fn manual(points: Vec<Point>) -> Self {
        Self::new(points, Provenance::Manual)
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The first `n` points, same provenance.
    pub fn prefix(&self, n: usize) -> PointSet {
        PointSet {
            points: self.points[..n].to_vec(),
            provenance: self.provenance,
            params: self.params.clone(),
        }
    }

    /// Writes `index,value` rows, values with 40 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "value"])?;
        for (i, p) in self.points.iter().enumerate() {
            w.write_record([(i + 1).to_string(), p.to_decimal(40)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `{k alpha}` for `k = 1..n`, in index order.
pub fn kronecker(alpha: &IrrationalSpec, n: usize, prec: &Precision) -> Result<PointSet> {
    if n as u64 > prec.n_max() {
        return Err(Error::PrecisionBudget {
            n: n as u128,
            n_max: prec.n_max(),
        });
    }
    let points = (1..=n as u64)
        .into_par_iter()
        .map(|k| frac_part_scaled(&BigUint::from(k), alpha, prec.bits()).value)
        .collect();
    Ok(PointSet::new(points, Provenance::Kronecker)
        .with("alpha", alpha)
        .with("N", n)
        .with("bits", prec.bits()))
}

/// Base-2 radical inverse of `n >= 1`.
pub fn radical_inverse(n: u64) -> Ratio<u64> {
    assert!(n >= 1);
    let len = 64 - n.leading_zeros();
    let rev = n.reverse_bits() >> (64 - len);
    // the leading bit of n lands in the last place, so rev is odd
    Ratio::new_raw(rev, 1u64 << len)
}

pub fn van_der_corput(n: usize) -> PointSet {
    let points = (1..=n as u64).map(|k| Point::Exact(radical_inverse(k))).collect();
    PointSet::new(points, Provenance::Vdc).with("N", n)
}

/// `k / (n + 1)` for `k = 1..n`.
pub fn uniform_grid(n: usize) -> PointSet {
    let den = n as u64 + 1;
    let points = (1..=n as u64).map(|k| Point::ratio(k, den)).collect();
    PointSet::new(points, Provenance::UniformGrid).with("N", n)
}

/// `{2^k alpha}` for `k = 1..n` at `bits` binary places, each computed exactly.
pub fn lacunary(alpha: &IrrationalSpec, n: usize, bits: u32) -> Result<PointSet> {
    if n as u64 > LACUNARY_MAX {
        return Err(out_of_range("N", n, "at most 1024 for lacunary sequences"));
    }
    let points = (1..=n)
        .into_par_iter()
        .map(|k| frac_part_scaled(&(BigUint::from(1u32) << k), alpha, bits).value)
        .collect();
    Ok(PointSet::new(points, Provenance::Lacunary)
        .with("alpha", alpha)
        .with("N", n)
        .with("bits", bits))
}

/// Draws one 128-bit uniform fraction.
pub fn uniform_point<R: Rng>(rng: &mut R) -> Point {
    Point::Fixed(FixedFrac::from_u128(rng.gen::<u128>()))
}

/// `n` i.i.d. uniforms from ChaCha20 seeded with `seed`.
pub fn random_uniform(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| uniform_point(&mut rng)).collect();
    PointSet::new(points, Provenance::IidUniform)
        .with("N", n)
        .with("seed", seed)
}

/// Selected indices `n_1 < n_2 < ...` together with `{n_k alpha}`.
#[derive(Clone, Debug)]
pub struct Subsequence {
    pub indices: Vec<u64>,
    pub points: PointSet,
}

/// Keeps each `n` with a fair coin until `n_terms` indices are selected.
pub fn random_subsequence(
    alpha: &IrrationalSpec,
    n_terms: usize,
    seed: u64,
    prec: &Precision,
) -> Result<Subsequence> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut sub = random_subsequence_with(alpha, n_terms, prec, |_| rng.gen::<bool>())?;
    sub.points.params.insert("seed".into(), seed.to_string());
    Ok(sub)
}

/// As [`random_subsequence`] with the coin `xi(n)` supplied by the caller.
pub fn random_subsequence_with(
    alpha: &IrrationalSpec,
    n_terms: usize,
    prec: &Precision,
    mut coin: impl FnMut(u64) -> bool,
) -> Result<Subsequence> {
    let mut indices = Vec::with_capacity(n_terms);
    let mut n = 0u64;
    while indices.len() < n_terms {
        n += 1;
        if n > prec.n_max() {
            return Err(Error::PrecisionBudget {
                n: n as u128,
                n_max: prec.n_max(),
            });
        }
        if coin(n) {
            indices.push(n);
        }
    }
    let points = indices
        .par_iter()
        .map(|&k| frac_part_scaled(&BigUint::from(k), alpha, prec.bits()).value)
        .collect();
    let points = PointSet::new(points, Provenance::RandomSubseq)
        .with("alpha", alpha)
        .with("N", n_terms);
    Ok(Subsequence { indices, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vdc_first_terms() {
        let v = van_der_corput(7);
        let want = [(1, 2), (1, 4), (3, 4), (1, 8), (5, 8), (3, 8), (7, 8)];
        for (p, (a, b)) in v.points.iter().zip(want) {
            assert_eq!(*p, Point::ratio(a, b));
        }
        for s in 0..40 {
            assert_eq!(radical_inverse(1 << s), Ratio::new(1, 1 << (s + 1)));
        }
    }

    #[test]
    fn grid_points() {
        let g = uniform_grid(3);
        assert_eq!(g.points, vec![Point::ratio(1, 4), Point::ratio(1, 2), Point::ratio(3, 4)]);
        assert_eq!(uniform_grid(1).points, vec![Point::ratio(1, 2)]);
    }

    #[test]
    fn random_is_reproducible() {
        assert_eq!(random_uniform(100, 9).points, random_uniform(100, 9).points);
        assert_ne!(random_uniform(100, 9).points, random_uniform(100, 10).points);
        assert!(random_uniform(0, 1).is_empty());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        uniform_grid(1).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("index,value\n1,0.5{}\n", "0".repeat(39)));
    }
}
