use crate::error::{Error, Result};
use crate::real::Real;

/// `values += sign · z` elementwise; decomposition adds corrections
/// (`sign = +1`), recomposition removes them (`sign = -1`).
pub fn apply_correction<T: Real>(values: &mut [T], z: &[T], sign: i32) -> Result<()> {
    if values.len() != z.len() {
        return Err(Error::Shape(format!(
            "{} corrections for {} coarse values",
            z.len(),
            values.len()
        )));
    }
    match sign {
        1 => values.iter_mut().zip(z).for_each(|(v, &c)| *v += c),
        -1 => values.iter_mut().zip(z).for_each(|(v, &c)| *v -= c),
        s => {
            return Err(Error::InvalidArgument(format!(
                "correction sign must be +1 or -1, got {s}"
            )))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_correction_is_identity() {
        let mut v = vec![1.25f64, -3.5, 7.0];
        apply_correction(&mut v, &[0.0; 3], 1).unwrap();
        assert_eq!(v, vec![1.25, -3.5, 7.0]);
    }

    #[test]
    fn add_then_remove_dyadic() {
        let orig = vec![0.5f32, 1.75, -2.0, 64.0];
        let z = vec![0.25f32, -0.125, 3.0, 1.0];
        let mut v = orig.clone();
        apply_correction(&mut v, &z, 1).unwrap();
        apply_correction(&mut v, &z, -1).unwrap();
        assert_eq!(v, orig);
    }

    #[test]
    fn mismatch_and_bad_sign() {
        let mut v = vec![0.0f64; 2];
        assert!(matches!(apply_correction(&mut v, &[0.0], 1), Err(Error::Shape(_))));
        assert!(apply_correction(&mut v, &[0.0, 0.0], 2).is_err());
    }
}
