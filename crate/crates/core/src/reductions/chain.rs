//! Iterated star reductions: the outermost level faces the circuit, each
//! further level trades one layer of depth for one more leakage round.

use rand::Rng;

use crate::bitlinalg::BitVec;
use crate::circuits::CollapseMode;
use crate::error::{Error, Result};
use crate::reductions::leaky::{LeakyAdversary, Tampering};
use crate::reductions::star::StarParams;

#[derive(Clone, Debug)]
pub struct StarChain {
    /// Outermost first: `levels[j].k == levels[j + 1].n`.
    pub levels: Vec<StarParams>,
    /// Decision-tree depth allowed after each collapse; final locality is `2^t`.
    pub t: usize,
}

impl StarChain {
    /// Chain compatibility only.
    pub fn relaxed(levels: Vec<StarParams>, t: usize) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InfeasibleParams("a chain needs at least one level".into()));
        }
        for (j, w) in levels.windows(2).enumerate() {
            if w[0].k != w[1].n {
                return Err(Error::InfeasibleParams(format!(
                    "level {} message length {} differs from level {} codeword length {}",
                    j + 1,
                    w[0].k,
                    j + 2,
                    w[1].n
                )));
            }
        }
        Ok(StarChain { levels, t })
    }

    /// Also checks every level's window and `2m ≤ k ≤ n(p/4)^d`.
    pub fn new(levels: Vec<StarParams>, t: usize) -> Result<Self> {
        let chain = Self::relaxed(levels, t)?;
        for (j, l) in chain.levels.iter().enumerate() {
            l.check_window().map_err(|e| Error::InfeasibleParams(format!("level {}: {}", j + 1, e)))?;
        }
        chain.check_budget()?;
        Ok(chain)
    }

    pub fn check_budget(&self) -> Result<()> {
        let m = self.levels.iter().map(|l| l.m()).max().unwrap_or(0);
        let (k, n) = (self.message_len(), self.codeword_len());
        let p = self.levels[0].p();
        let hi = n as f64 * (p / 4.0).powi(self.depth() as i32);
        if 2 * m > k {
            return Err(Error::InfeasibleParams(format!("2m ≤ k fails: 2·{} > {}", m, k)));
        }
        if k as f64 > hi {
            return Err(Error::InfeasibleParams(format!("k ≤ n(p/4)^d fails: {} > {}", k, hi)));
        }
        Ok(())
    }

    /// Levels built inward from `k`. Strict chains use `n = 4k/p` per level,
    /// relaxed ones the smallest `n` with `(n − m)p/2 ≥ k`.
    pub fn design(k: usize, d: usize, p_log_inv: usize, sigma: usize, t: usize, strict: bool) -> Result<Self> {
        let mut levels = Vec::with_capacity(d);
        let mut inner = k;
        for _ in 0..d {
            let n = if strict {
                inner << (p_log_inv + 2)
            } else {
                let payload = inner << (p_log_inv + 1);
                let mut n = payload;
                loop {
                    let m = StarParams::with_default_code(0, n, p_log_inv, sigma, false).map(|l| l.m()).unwrap_or(n);
                    if n >= payload + m {
                        break n;
                    }
                    n = payload + m;
                }
            };
            let level = StarParams::with_default_code(inner, n, p_log_inv, sigma, strict)?;
            inner = n;
            levels.push(level);
        }
        levels.reverse();
        if strict {
            Self::new(levels, t)
        } else {
            Self::relaxed(levels, t)
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn message_len(&self) -> usize {
        self.levels.last().expect("non-empty").k
    }

    pub fn codeword_len(&self) -> usize {
        self.levels[0].n
    }

    pub fn encode<R: Rng + ?Sized>(&self, x: &BitVec, rng: &mut R) -> Result<BitVec> {
        let mut c = x.clone();
        for l in self.levels.iter().rev() {
            c = l.encode(&c, rng)?;
        }
        Ok(c)
    }

    pub fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        let mut x = c.clone();
        for l in &self.levels {
            match l.decode(&x)? {
                Some(y) => x = y,
                None => return Ok(None),
            }
        }
        Ok(Some(x))
    }

    /// Runs every level's simulator in turn with modes from `CollapseMode::for_level`.
    pub fn simulate<R: Rng + ?Sized>(&self, tau: &LeakyAdversary, rng: &mut R) -> Result<Tampering> {
        let d = self.depth();
        let mut cur = tau.clone();
        for (j, l) in self.levels.iter().enumerate() {
            match l.simulate(&cur, self.t, CollapseMode::for_level(j, d), rng)? {
                Tampering::Leaky(next) => cur = next,
                constant => return Ok(constant),
            }
        }
        Ok(Tampering::Leaky(cur))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn strict_design_rate() {
        let chain = StarChain::design(64, 2, 1, 1, 2, true).unwrap();
        assert_eq!(chain.codeword_len(), 64 * 8 * 8);
        assert_eq!(chain.message_len(), 64);
        assert!(StarChain::design(32, 2, 1, 1, 2, true).unwrap_err().to_string().contains("2m ≤ k"));
    }

    #[test]
    fn relaxed_design_roundtrip() {
        let chain = StarChain::design(6, 2, 1, 1, 1, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for xi in 0..64 {
            let x = BitVec::from_u64(xi, 6);
            let c = chain.encode(&x, &mut rng).unwrap();
            assert_eq!(c.len(), chain.codeword_len());
            assert_eq!(chain.decode(&c).unwrap(), Some(x));
        }
    }

    #[test]
    fn incompatible_levels_rejected() {
        let a = StarParams::with_default_code(8, 64, 1, 1, false).unwrap();
        let b = StarParams::with_default_code(4, 32, 1, 1, false).unwrap();
        let e = StarChain::relaxed(vec![a, b], 1).unwrap_err().to_string();
        assert!(e.contains("level 1 message length 8"), "{}", e);
    }
}
