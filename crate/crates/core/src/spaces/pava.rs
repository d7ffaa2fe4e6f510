use crate::error::{MrfError, Result};

/// Weighted L₂ projection of `values` onto nondecreasing vectors
/// (pool adjacent violators).
pub fn pava_isotonic(values: &[f64], grid_weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != grid_weights.len() {
        return Err(MrfError::LengthMismatch {
            expected: values.len(),
            found: grid_weights.len(),
        });
    }
    if let Some(w) = grid_weights.iter().find(|w| **w <= 0.0 || !w.is_finite()) {
        return Err(MrfError::InvalidWeights(format!(
            "grid weight {w} must be positive"
        )));
    }

    // (mean, total weight, length) of each pooled block
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(grid_weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m1, w1, l1) = blocks[blocks.len() - 1];
            let (m0, w0, l0) = blocks[blocks.len() - 2];
            if m0 <= m1 {
                break;
            }
            let w = w0 + w1;
            blocks.truncate(blocks.len() - 2);
            blocks.push(((m0 * w0 + m1 * w1) / w, w, l0 + l1));
        }
    }

    let mut out = Vec::with_capacity(values.len());
    for (mean, _, len) in blocks {
        out.extend(std::iter::repeat_n(mean, len));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(values: &[f64]) -> Vec<f64> {
        pava_isotonic(values, &vec![1.0; values.len()]).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(unit(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(unit(&[2.0, 1.0]), vec![1.5, 1.5]);
        // Of the feasible block partitions of three points, pooling {3, 2}
        // has squared error 0.5; pooling {1, 3} or all three costs 2.
        assert_eq!(unit(&[1.0, 3.0, 2.0]), vec![1.0, 2.5, 2.5]);
    }

    #[test]
    fn weighted_pool() {
        let out = pava_isotonic(&[3.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_eq!(out, vec![1.0, 1.0]);
    }

    #[test]
    fn errors() {
        assert!(pava_isotonic(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pava_isotonic(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert_eq!(pava_isotonic(&[], &[]).unwrap(), Vec::<f64>::new());
    }
}
