use rand::Rng;

/// Softmax of `utilities / sigma`, computed with log-sum-exp.
pub fn softmax(utilities: &[f64], sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    if utilities.is_empty() {
        return Vec::new();
    }
    let scaled: Vec<f64> = utilities.iter().map(|u| u / sigma).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scaled.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    scaled.iter().map(|x| (x - lse).exp()).collect()
}

/// Draws an index from `probabilities`.
pub fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

/// Picks one of `utilities` with softmax probabilities. Returns the index
/// and the full probability vector.
pub fn select<R: Rng + ?Sized>(utilities: &[f64], sigma: f64, rng: &mut R) -> (usize, Vec<f64>) {
    assert!(!utilities.is_empty(), "cannot select from an empty conflict set");
    let p = softmax(utilities, sigma);
    (sample_index(&p, rng), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn symmetric_pair() {
        assert_eq!(softmax(&[0.0, 0.0], SQRT2), vec![0.5, 0.5]);
    }

    #[test]
    fn direct_evaluation() {
        let p = softmax(&[10.0, 0.0], SQRT2);
        let e = (10.0 / SQRT2).exp();
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((p[0] - 0.99915).abs() < 1e-5);
    }

    #[test]
    fn shift_invariance_and_overflow() {
        let a = softmax(&[1.0, 2.0, 3.0], 0.7);
        let b = softmax(&[1001.0, 1002.0, 1003.0], 0.7);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let big = softmax(&[1e6, 0.0], 1e-3);
        assert_eq!(big, vec![1.0, 0.0]);
    }

    #[test]
    fn sampling_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| select(&[0.0, 0.0], SQRT2, &mut rng).0 == 0)
            .count();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 0.02);
    }
}
