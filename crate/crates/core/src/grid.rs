use crate::error::{Error, Result};

/// Nondecreasing sample times starting at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        match points.first() {
            None => return Err(Error::InvalidGrid("empty grid".into())),
            Some(&t0) if t0 != 0.0 => {
                return Err(Error::InvalidGrid(format!("grid starts at {t0}, not 0")))
            }
            _ => {}
        }
        if let Some(t) = points.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite time {t}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] < w[0]) {
            return Err(Error::InvalidGrid(format!(
                "grid decreases from {} to {}",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    /// `points` equally spaced samples on `[0, t_max]`.
    pub fn uniform(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!("{points} points; need at least 2")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("t_max = {t_max}")));
        }
        let h = t_max / (points - 1) as f64;
        let mut v: Vec<f64> = (0..points).map(|k| k as f64 * h).collect();
        v[points - 1] = t_max;
        Self::new(v)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.points.last().unwrap()
    }
}
