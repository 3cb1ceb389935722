//! Ensemble aggregation.

use serde::Serialize;

/// Percentile levels reported for every ensemble curve.
pub const LEVELS: [(&str, f64); 5] = [
    ("p2_5", 2.5),
    ("p5", 5.0),
    ("median", 50.0),
    ("p95", 95.0),
    ("p97_5", 97.5),
];

/// Linear-interpolation percentile (`q` in percent) of unsorted data.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, q)
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q / 100.0 * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    percentile(values, 50.0)
}

/// Per-epoch percentile curves of one metric over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub metric: String,
    pub epochs: Vec<usize>,
    pub p2_5: Vec<f64>,
    pub p5: Vec<f64>,
    pub median: Vec<f64>,
    pub p95: Vec<f64>,
    pub p97_5: Vec<f64>,
    /// Last value of every instance, in instance order.
    pub finals: Vec<f64>,
    /// Instances whose training stopped early; their curves hold their last
    /// value from then on.
    pub aborted: usize,
}

impl EnsembleSummary {
    /// `series[i][e]` is instance `i` at epoch `e`; shorter series are padded
    /// with their last value.
    pub fn from_series(metric: &str, series: &[Vec<f64>], aborted: usize) -> Self {
        let len = series.iter().map(Vec::len).max().unwrap_or(0);
        let padded: Vec<Vec<f64>> = series
            .iter()
            .map(|s| {
                let mut s = s.clone();
                let last = s.last().copied().unwrap_or(f64::NAN);
                s.resize(len, last);
                s
            })
            .collect();
        let mut curves: [Vec<f64>; 5] = Default::default();
        for e in 0..len {
            let mut column: Vec<f64> = padded.iter().map(|s| s[e]).collect();
            column.sort_by(f64::total_cmp);
            for (curve, (_, q)) in curves.iter_mut().zip(LEVELS) {
                curve.push(percentile_sorted(&column, q));
            }
        }
        let [p2_5, p5, median, p95, p97_5] = curves;
        EnsembleSummary {
            metric: metric.to_string(),
            epochs: (0..len).collect(),
            p2_5,
            p5,
            median,
            p95,
            p97_5,
            finals: padded.iter().map(|s| s.last().copied().unwrap_or(f64::NAN)).collect(),
            aborted,
        }
    }

    pub fn median_at(&self, epoch: usize) -> f64 {
        self.median[epoch.min(self.median.len() - 1)]
    }

    pub fn final_median(&self) -> f64 {
        *self.median.last().expect("empty summary")
    }

    /// CSV with columns `epoch, p2_5, p5, median, p95, p97_5`.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = String::from("epoch");
        for (name, _) in LEVELS {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, e) in self.epochs.iter().enumerate() {
            out.push_str(&e.to_string());
            for curve in [&self.p2_5, &self.p5, &self.median, &self.p95, &self.p97_5] {
                out.push(',');
                out.push_str(&format!("{:?}", curve[i]));
            }
            out.push('\n');
        }
        out.into_bytes()
    }

    /// Final values of each percentile curve.
    pub fn final_percentiles(&self) -> serde_json::Value {
        let last = |c: &Vec<f64>| c.last().copied();
        serde_json::json!({
            "p2_5": last(&self.p2_5),
            "p5": last(&self.p5),
            "median": last(&self.median),
            "p95": last(&self.p95),
            "p97_5": last(&self.p97_5),
        })
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn percentile_interpolates() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 4.0);
        assert_eq!(percentile(&v, 50.0), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn short_series_are_padded() {
        let s = EnsembleSummary::from_series("x", &[vec![1.0, 2.0, 3.0], vec![5.0]], 1);
        assert_eq!(s.finals, vec![3.0, 5.0]);
        assert_eq!(s.median, vec![3.0, 3.5, 4.0]);
        let csv = String::from_utf8(s.to_csv()).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "epoch,p2_5,p5,median,p95,p97_5");
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| -1.0 * v + 2.0).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a + 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn curves_are_ordered(series in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 1..8), 1..20)) {
            let s = EnsembleSummary::from_series("m", &series, 0);
            for e in 0..s.epochs.len() {
                prop_assert!(s.p2_5[e] <= s.p5[e]);
                prop_assert!(s.p5[e] <= s.median[e]);
                prop_assert!(s.median[e] <= s.p95[e]);
                prop_assert!(s.p95[e] <= s.p97_5[e]);
            }
        }
    }
}
