//! Finite-difference oracle for partial derivatives up to order three.
//!
//! Nested central differences have an error expansion in even powers of the
//! step, so one Richardson level `(4 D(h/2) - D(h)) / 3` gives truncation
//! order four.

use super::{eval_value, JetFn};
use crate::error::{FinslerError, Result};

/// Default step for first derivatives.
pub const FD_DEFAULT_STEP: f64 = 1e-4;

/// Step that balances truncation against roundoff for a derivative of the given order.
///
/// Roundoff grows like `eps / h^order`, so higher orders need larger steps.
pub fn default_step(order: usize) -> f64 {
    match order {
        0 | 1 => FD_DEFAULT_STEP,
        2 => 1e-2,
        _ => 5e-3,
    }
}

fn nested_central<F: JetFn + ?Sized>(
    f: &F,
    point: &mut Vec<f64>,
    multi_index: &[usize],
    steps: &[f64],
) -> Result<f64> {
    match multi_index.split_first() {
        None => eval_value(f, point),
        Some((&i, rest)) => {
            let x = point[i];
            let h = steps[i];
            point[i] = x + h;
            let plus = nested_central(f, point, rest, steps);
            point[i] = x - h;
            let minus = nested_central(f, point, rest, steps);
            point[i] = x;
            Ok((plus? - minus?) / (2.0 * h))
        }
    }
}

/// Central finite-difference estimate of `∂^|α| f / ∂x^α` at `point`, with one Richardson level.
///
/// The step is relative: coordinate `i` moves by `step * max(1, |x_i|)`.
pub fn fd_derivative<F: JetFn + ?Sized>(
    f: &F,
    point: &[f64],
    multi_index: &[usize],
    step: f64,
) -> Result<f64> {
    if multi_index.len() > 3 {
        return Err(FinslerError::InvalidInput(format!(
            "finite differences support order <= 3, got {}",
            multi_index.len()
        )));
    }
    if let Some(&bad) = multi_index.iter().find(|&&i| i >= point.len()) {
        return Err(FinslerError::InvalidInput(format!(
            "variable index {bad} out of range for a {}-dimensional point",
            point.len()
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(FinslerError::Numerical(format!(
            "finite-difference step must be positive and finite, got {step}"
        )));
    }
    // the half step must still move every differentiated coordinate
    for &i in multi_index {
        let x = point[i];
        let h = 0.5 * step * x.abs().max(1.0);
        if x + h == x || x - h == x {
            return Err(FinslerError::Numerical(format!(
                "finite-difference step {step} underflows at coordinate {i} = {x}"
            )));
        }
    }
    let steps: Vec<f64> = point.iter().map(|x| step * x.abs().max(1.0)).collect();
    let half: Vec<f64> = steps.iter().map(|h| 0.5 * h).collect();
    let mut p = point.to_vec();
    let coarse = nested_central(f, &mut p, multi_index, &steps)?;
    if multi_index.is_empty() {
        return Ok(coarse);
    }
    let fine = nested_central(f, &mut p, multi_index, &half)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
