use crate::error::{invalid, Error, Result};

/// Consecutive, non-overlapping length-`window` intervals of a series stacked as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    /// Column-major `[window × n_intervals]`; column `j` is `series[j·window .. (j+1)·window]`.
    data: Vec<f64>,
    window: usize,
    n_intervals: usize,
}

impl TrajectoryMatrix {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Zero-based `(row, col)` access.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.window && col < self.n_intervals, "index ({row}, {col}) out of bounds");
        self.data[col * self.window + row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.window..(col + 1) * self.window]
    }

    pub fn columns(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.window)
    }

    /// Sample indices of the series covered by interval `col`.
    pub fn span(&self, col: usize) -> std::ops::Range<usize> {
        col * self.window..(col + 1) * self.window
    }
}

/// The trailing `len mod window` samples are dropped.
pub fn build_trajectory(series: &[f64], window: usize) -> Result<TrajectoryMatrix> {
    if window < 2 {
        return Err(invalid("window", "must be at least 2"));
    }
    if series.len() < 2 * window {
        return Err(Error::WindowTooLarge {
            window,
            needed: 2 * window,
            available: series.len(),
        });
    }
    let n_intervals = series.len() / window;
    Ok(TrajectoryMatrix {
        data: series[..n_intervals * window].to_vec(),
        window,
        n_intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reshape_arithmetic() {
        let s: Vec<f64> = (0..1000).map(f64::from).collect();
        let m = build_trajectory(&s, 100).unwrap();
        assert_eq!((m.window(), m.n_intervals()), (100, 10));

        let s: Vec<f64> = (0..1050).map(f64::from).collect();
        let m = build_trajectory(&s, 100).unwrap();
        assert_eq!(m.n_intervals(), 10);
        assert_eq!(m.span(9), 900..1000);
    }

    #[test]
    fn element_two_one_is_sample_l_plus_two() {
        // 1-based x(k) = k on a 12-sample toy with L = 4
        let s: Vec<f64> = (1..=12).map(f64::from).collect();
        let m = build_trajectory(&s, 4).unwrap();
        assert_eq!(m.get(1, 1), 6.0);
        assert_eq!(m.column(2), &[9.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn too_large_window() {
        assert!(matches!(
            build_trajectory(&[0.0; 150], 100),
            Err(Error::WindowTooLarge {
                needed: 200,
                available: 150,
                ..
            })
        ));
        assert!(build_trajectory(&[0.0; 150], 1).is_err());
    }
}
