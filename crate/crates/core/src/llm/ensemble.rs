use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{connect, BackendSpec, LlmError, ScriptRegistry, SharedBackend};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub backend: BackendSpec,
    pub probability: f64,
}

/// Critic backends with per-call selection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticEnsembleSpec {
    pub members: Vec<EnsembleMember>,
    pub seed: u64,
}

impl CriticEnsembleSpec {
    pub fn single(backend: BackendSpec, seed: u64) -> Self {
        CriticEnsembleSpec {
            members: vec![EnsembleMember {
                backend,
                probability: 1.0,
            }],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.members.is_empty() {
            return Err(LlmError::Config("critic ensemble is empty".into()));
        }
        if self
            .members
            .iter()
            .any(|m| !(m.probability >= 0.0 && m.probability.is_finite()))
        {
            return Err(LlmError::Config("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = self.members.iter().map(|m| m.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(LlmError::Config(format!(
                "critic probabilities sum to {total}, expected 1"
            )));
        }
        for m in &self.members {
            m.backend.validate()?;
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Draws an index from `weights` (which sum to one).
fn draw(weights: impl Iterator<Item = f64> + Clone, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Picks one member's backend spec per the ensemble probabilities.
pub fn sample_critic_backend<'a>(
    ensemble: &'a CriticEnsembleSpec,
    rng: &mut impl Rng,
) -> &'a BackendSpec {
    let i = draw(ensemble.members.iter().map(|m| m.probability), rng);
    &ensemble.members[i].backend
}

/// Connected ensemble with its own seeded stream.
pub struct CriticEnsemble {
    members: Vec<(SharedBackend, f64)>,
    rng: Mutex<ChaCha8Rng>,
}

impl CriticEnsemble {
    pub fn connect(spec: &CriticEnsembleSpec, scripts: &ScriptRegistry) -> Result<Self, LlmError> {
        spec.validate()?;
        let members = spec
            .members
            .iter()
            .map(|m| Ok((connect(&m.backend, scripts)?, m.probability)))
            .collect::<Result<Vec<_>, LlmError>>()?;
        Ok(CriticEnsemble {
            members,
            rng: Mutex::new(spec.rng()),
        })
    }

    /// Builds an ensemble from live backends directly.
    pub fn from_backends(members: Vec<(SharedBackend, f64)>, seed: u64) -> Self {
        assert!(!members.is_empty(), "critic ensemble is empty");
        let total: f64 = members.iter().map(|m| m.1).sum();
        assert!((total - 1.0).abs() <= 1e-9, "probabilities sum to {total}");
        CriticEnsemble {
            members,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn homogeneous(backend: SharedBackend, seed: u64) -> Self {
        Self::from_backends(vec![(backend, 1.0)], seed)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Returns the member index and its backend.
    pub fn sample(&self) -> (usize, SharedBackend) {
        let mut rng = self.rng.lock().expect("ensemble rng poisoned");
        let i = draw(self.members.iter().map(|m| m.1), &mut *rng);
        (i, self.members[i].0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(pa: f64, seed: u64) -> CriticEnsembleSpec {
        CriticEnsembleSpec {
            members: vec![
                EnsembleMember {
                    backend: BackendSpec::scripted("a"),
                    probability: pa,
                },
                EnsembleMember {
                    backend: BackendSpec::scripted("b"),
                    probability: 1.0 - pa,
                },
            ],
            seed,
        }
    }

    #[test]
    fn degenerate_distribution() {
        let spec = CriticEnsembleSpec::single(BackendSpec::scripted("a"), 3);
        let mut rng = spec.rng();
        for _ in 0..100 {
            assert_eq!(sample_critic_backend(&spec, &mut rng).script.as_deref(), Some("a"));
        }
        let spec = pair(1.0, 9);
        let mut rng = spec.rng();
        for _ in 0..1000 {
            assert_eq!(sample_critic_backend(&spec, &mut rng).script.as_deref(), Some("a"));
        }
    }

    #[test]
    fn even_split_frequency() {
        let spec = pair(0.5, 2025);
        let mut rng = spec.rng();
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| sample_critic_backend(&spec, &mut rng).script.as_deref() == Some("a"))
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn same_seed_same_sequence() {
        let spec = pair(0.3, 11);
        let seq = |spec: &CriticEnsembleSpec| {
            let mut rng = spec.rng();
            (0..200)
                .map(|_| sample_critic_backend(spec, &mut rng).script.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(&spec), seq(&spec));
        assert_ne!(seq(&spec), seq(&pair(0.3, 12)));
    }

    #[test]
    fn validation() {
        assert!(pair(0.5, 0).validate().is_ok());
        let mut bad = pair(0.5, 0);
        bad.members[0].probability = 0.6;
        assert!(bad.validate().is_err());
        let mut within = pair(0.5, 0);
        within.members[0].probability += 5e-10;
        assert!(within.validate().is_ok());
        assert!(CriticEnsembleSpec { members: vec![], seed: 0 }.validate().is_err());
    }
}
