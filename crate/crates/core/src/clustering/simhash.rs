//! Random-hyperplane SimHash.
//!
//! Bit `i` of a code is the sign of `<projection row i, x>`, with an exact zero
//! counted as positive. Two vectors at angle `theta` agree on each bit with
//! probability `1 - theta / pi`.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

pub const MAX_CODE_BITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashCode(pub u64);

impl HashCode {
    /// Number of the low `bits` bits on which two codes agree.
    pub fn agreement(self, other: HashCode, bits: usize) -> u32 {
        let mask = low_mask(bits);
        (!(self.0 ^ other.0) & mask).count_ones()
    }

    pub fn complement(self, bits: usize) -> HashCode {
        HashCode(!self.0 & low_mask(bits))
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Code width needed to address `k_target` clusters.
pub fn bits_for_clusters(k_target: usize) -> Result<usize> {
    if k_target < 2 {
        return Err(Error::Config(format!(
            "SimHash cluster budget must be at least 2, got {k_target}"
        )));
    }
    let bits = (usize::BITS - (k_target - 1).leading_zeros()) as usize;
    if bits > MAX_CODE_BITS {
        return Err(Error::Config(format!("cluster budget {k_target} needs more than 64 bits")));
    }
    Ok(bits)
}

#[derive(Debug, Clone)]
pub struct SimHash {
    bits: usize,
    dim: usize,
    seed: u64,
    // row-major, bits x dim
    projection: Vec<f64>,
}

impl SimHash {
    pub fn new(bits: usize, dim: usize, seed: u64) -> Result<Self> {
        if bits == 0 || bits > MAX_CODE_BITS {
            return Err(Error::Config(format!("code width must be in 1..=64, got {bits}")));
        }
        if dim == 0 {
            return Err(Error::Config("feature dimension must be positive".into()));
        }
        let mut rng = rng::stream(seed, rng::streams::CLUSTERING);
        let projection = (0..bits * dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Self {
            bits,
            dim,
            seed,
            projection,
        })
    }

    pub fn with_cluster_budget(k_target: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::new(bits_for_clusters(k_target)?, dim, seed)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.projection[i * self.dim..(i + 1) * self.dim]
    }

    pub fn code(&self, x: &[f64]) -> Result<HashCode> {
        if x.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "expected {}-dimensional input, got {}",
                self.dim,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite component in SimHash input".into()));
        }
        let mut code = 0u64;
        for i in 0..self.bits {
            let dot: f64 = self.row(i).iter().zip(x).map(|(w, v)| w * v).sum();
            if dot >= 0.0 {
                code |= 1 << i;
            }
        }
        Ok(HashCode(code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_match_ceil_log2() {
        assert_eq!(bits_for_clusters(2).unwrap(), 1);
        assert_eq!(bits_for_clusters(64).unwrap(), 6);
        assert_eq!(bits_for_clusters(65).unwrap(), 7);
        assert_eq!(bits_for_clusters(128).unwrap(), 7);
        assert!(bits_for_clusters(1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = SimHash::new(16, 3, 9).unwrap();
        let b = SimHash::new(16, 3, 9).unwrap();
        let c = SimHash::new(16, 3, 10).unwrap();
        let x = [0.3, -1.2, 4.0];
        assert_eq!(a.code(&x).unwrap(), b.code(&x).unwrap());
        assert_ne!(a.projection, c.projection);
    }

    #[test]
    fn zero_vector_hashes_to_all_ones() {
        let h = SimHash::new(7, 2, 1).unwrap();
        assert_eq!(h.code(&[0.0, 0.0]).unwrap(), HashCode(0x7f));
    }

    #[test]
    fn at_most_two_pow_bits_codes() {
        let h = SimHash::with_cluster_budget(128, 4, 3).unwrap();
        let mut rng = rng::stream(5, 0);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
            assert!(h.code(&x).unwrap().0 < 128);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let h = SimHash::new(8, 2, 1).unwrap();
        assert!(h.code(&[f64::NAN, 0.0]).is_err());
        assert!(h.code(&[1.0]).is_err());
        assert!(SimHash::new(0, 2, 1).is_err());
        assert!(SimHash::new(65, 2, 1).is_err());
    }

    #[test]
    fn complement_and_agreement() {
        let c = HashCode(0b1010);
        assert_eq!(c.complement(4), HashCode(0b0101));
        assert_eq!(c.agreement(c, 4), 4);
        assert_eq!(c.agreement(c.complement(4), 4), 0);
        assert_eq!(HashCode(u64::MAX).complement(64), HashCode(0));
    }
}
