//! Disorder realizations of the random energy model.
//!
//! An instance is `2^n` independent Gaussian energies of mean zero and
//! variance `n / 2`, indexed by the computational basis state whose bits are
//! the spins. Energies are regenerated from `(n, seed)`; only the header is
//! ever persisted.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QremError, Result};
use crate::rng::{CounterRng, RNG_VERSION, STREAM_ENERGIES};

/// Largest supported spin count. The energy table alone is 2^26 · 8 B = 512 MiB.
pub const MAX_SPINS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct RemInstance {
    n: usize,
    seed: Option<u64>,
    energies: Vec<f64>,
}

/// Persistent description of a sampled instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub n: usize,
    pub seed: u64,
    pub rng_version: u32,
}

fn check_spins(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SPINS {
        return Err(QremError::Capacity {
            what: "REM instance",
            n,
            max: MAX_SPINS,
        });
    }
    Ok(())
}

impl RemInstance {
    /// Draws the `2^n` energies for `(n, seed)`.
    pub fn sample(n: usize, seed: u64) -> Result<Self> {
        check_spins(n)?;
        let rng = CounterRng::new(seed, n as u64, STREAM_ENERGIES);
        let scale = (n as f64 / 2.0).sqrt();
        let energies = (0..1u64 << n)
            .into_par_iter()
            .map(|alpha| scale * rng.gaussian(alpha))
            .collect();
        Ok(Self {
            n,
            seed: Some(seed),
            energies,
        })
    }

    /// Wraps hand-chosen energies; the length must be a power of two ≥ 2.
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let len = energies.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QremError::domain(format!(
                "energy table length {len} is not a power of two >= 2"
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(QremError::domain("energies must be finite"));
        }
        let n = len.trailing_zeros() as usize;
        check_spins(n)?;
        Ok(Self {
            n,
            seed: None,
            energies,
        })
    }

    pub fn from_header(header: &InstanceHeader) -> Result<Self> {
        if header.rng_version != RNG_VERSION {
            return Err(QremError::domain(format!(
                "instance was generated with rng_version {}, this build provides {}",
                header.rng_version, RNG_VERSION
            )));
        }
        Self::sample(header.n, header.seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Basis index of the classical ground state (lowest index on ties).
    pub fn ground_index(&self) -> usize {
        let mut best = 0;
        for (i, &e) in self.energies.iter().enumerate() {
            if e < self.energies[best] {
                best = i;
            }
        }
        best
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[self.ground_index()]
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.energies.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// The `k` smallest energies in ascending order.
    pub fn lowest_energies(&self, k: usize) -> Vec<f64> {
        let mut sorted = self.energies.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.truncate(k);
        sorted
    }

    pub fn header(&self) -> Result<InstanceHeader> {
        let seed = self.seed.ok_or(QremError::NotReproducible)?;
        Ok(InstanceHeader {
            n: self.n,
            seed,
            rng_version: RNG_VERSION,
        })
    }

    pub fn write_header_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.header()?)?;
        Ok(())
    }

    pub fn read_header_json<R: Read>(reader: R) -> Result<Self> {
        let header: InstanceHeader = serde_json::from_reader(reader)?;
        Self::from_header(&header)
    }

    /// Raw export: little-endian `f64` in basis order.
    pub fn write_raw<W: Write>(&self, mut writer: W) -> Result<()> {
        for e in &self.energies {
            writer.write_all(&e.to_le_bytes())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spin_has_two_finite_energies() {
        for seed in [0, 1, u64::MAX] {
            let inst = RemInstance::sample(1, seed).unwrap();
            assert_eq!(inst.energies().len(), 2);
            assert!(inst.energies().iter().all(|e| e.is_finite()));
        }
    }

    #[test]
    fn sampling_is_bit_reproducible() {
        let a = RemInstance::sample(16, 7).unwrap();
        let b = RemInstance::sample(16, 7).unwrap();
        let bits = |i: &RemInstance| i.energies().iter().map(|e| e.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, RemInstance::sample(16, 8).unwrap());
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(
            RemInstance::sample(0, 1),
            Err(QremError::Capacity { .. })
        ));
        assert!(matches!(
            RemInstance::sample(MAX_SPINS + 1, 1),
            Err(QremError::Capacity { .. })
        ));
    }

    #[test]
    fn crafted_instances() {
        let inst = RemInstance::from_energies(vec![-2.0, 0.1, 0.2, 0.3]).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.ground_index(), 0);
        assert_eq!(inst.lowest_energies(2), vec![-2.0, 0.1]);
        assert!(matches!(inst.header(), Err(QremError::NotReproducible)));
        assert!(RemInstance::from_energies(vec![1.0, 2.0, 3.0]).is_err());
        assert!(RemInstance::from_energies(vec![1.0]).is_err());
    }

    #[test]
    fn header_round_trip_regenerates_energies() {
        let inst = RemInstance::sample(10, 42).unwrap();
        let mut buf = Vec::new();
        inst.write_header_json(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"rng_version\""));
        let back = RemInstance::read_header_json(buf.as_slice()).unwrap();
        assert_eq!(back, inst);

        let stale = InstanceHeader {
            rng_version: RNG_VERSION + 1,
            ..inst.header().unwrap()
        };
        assert!(RemInstance::from_header(&stale).is_err());
    }

    #[test]
    fn raw_export_layout() {
        let inst = RemInstance::from_energies(vec![0.5, -1.25]).unwrap();
        let mut buf = Vec::new();
        inst.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 16);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), -1.25);
    }

    #[test]
    fn moments_match_rem_variance() {
        // Seed-averaged over 20 instances at n = 14.
        let n = 14;
        let half_n = n as f64 / 2.0;
        let (mut mean_acc, mut var_acc) = (0.0, 0.0);
        let seeds = 20;
        for seed in 0..seeds {
            let inst = RemInstance::sample(n, seed).unwrap();
            let m = inst.dim() as f64;
            let mean = inst.energies().iter().sum::<f64>() / m;
            let var = inst.energies().iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
            mean_acc += mean;
            var_acc += var;
        }
        let mean = mean_acc / seeds as f64;
        let var = var_acc / seeds as f64;
        assert!(mean.abs() <= 5.0 * half_n.sqrt() * 2f64.powf(-(n as f64) / 2.0));
        assert!((var - half_n).abs() <= 0.1 * half_n);
    }

    #[test]
    fn ground_energy_density_near_rem_value() {
        // Brute-force minimum over 200 generated arrays.
        let n = 16;
        let mean: f64 = (0..200)
            .map(|seed| RemInstance::sample(n, seed).unwrap().ground_energy() / n as f64)
            .sum::<f64>()
            / 200.0;
        assert!((-0.90..=-0.72).contains(&mean), "mean min(E)/n = {mean}");
    }
}
