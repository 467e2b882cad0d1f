//! Measured tumor confluence in a well of radius 0.32 cm over 21 days, for
//! three initial seedings.

/// Observation days shared by all series.
pub const DAYS: [f64; 22] = [
    0.0, 0.70, 1.96, 2.64, 3.78, 4.95, 5.63, 6.63, 7.29, 8.69, 9.64, 10.70, 11.70, 12.68, 13.90,
    14.68, 15.59, 16.85, 17.75, 18.78, 19.55, 20.66,
];

const SERIES_00562: [f64; 22] = [
    0.00562, 0.00928, 0.00641, 0.0131, 0.0143, 0.0206, 0.0283, 0.0401, 0.0651, 0.0622, 0.0852,
    0.100, 0.0957, 0.0948, 0.103, 0.0992, 0.0995, 0.108, 0.108, 0.104, 0.101, 0.115,
];

const SERIES_00871: [f64; 22] = [
    0.00871, 0.0132, 0.0107, 0.0203, 0.0253, 0.0427, 0.0609, 0.0637, 0.0815, 0.103, 0.103, 0.119,
    0.108, 0.110, 0.118, 0.0994, 0.114, 0.103, 0.108, 0.111, 0.110, 0.113,
];

const SERIES_01410: [f64; 22] = [
    0.0141, 0.0309, 0.022, 0.0403, 0.0395, 0.060, 0.094, 0.107, 0.0981, 0.131, 0.121, 0.121,
    0.106, 0.111, 0.116, 0.0983, 0.118, 0.102, 0.105, 0.116, 0.109, 0.101,
];

/// One measured confluence curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfluenceSeries {
    pub initial_confluence: f64,
    /// `(day, confluence)` pairs, days strictly increasing from 0.
    pub observations: Vec<(f64, f64)>,
}

impl ConfluenceSeries {
    pub fn days(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.1).collect()
    }

    pub fn last_day(&self) -> f64 {
        self.observations.last().map_or(0.0, |o| o.0)
    }
}

/// The three embedded series, ordered by initial confluence.
pub fn load_dataset() -> Vec<ConfluenceSeries> {
    [SERIES_00562, SERIES_00871, SERIES_01410]
        .iter()
        .map(|s| ConfluenceSeries {
            initial_confluence: s[0],
            observations: DAYS.iter().copied().zip(s.iter().copied()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha2::{Digest, Sha256};

    #[test]
    fn endpoints() {
        let d = load_dataset();
        assert_eq!(d.len(), 3);
        assert_eq!(d[0].observations[0], (0.0, 0.00562));
        assert_eq!(d[0].observations[21], (20.66, 0.115));
        assert_eq!(d[1].observations[21], (20.66, 0.113));
        assert_eq!(d[2].observations[21], (20.66, 0.101));
        assert_eq!(
            d.iter().map(|s| s.initial_confluence).collect::<Vec<_>>(),
            vec![0.00562, 0.00871, 0.0141]
        );
    }

    #[test]
    fn series_are_well_formed() {
        for s in load_dataset() {
            assert_eq!(s.observations.len(), 22);
            assert_eq!(s.observations[0].0, 0.0);
            assert!(s.observations.windows(2).all(|w| w[1].0 > w[0].0));
            assert!(s.observations.iter().all(|o| o.1 > 0.0 && o.1 < 1.0));
        }
    }

    #[test]
    fn checksum_is_pinned() {
        let mut h = Sha256::new();
        for s in load_dataset() {
            for (d, c) in s.observations {
                h.update(format!("{d:.2},{c}\n"));
            }
        }
        let digest: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(digest, PINNED);
    }

    const PINNED: &str = "7df83bc0f47a1a5e7a2af34f65992064d5f7a58a545531256fc1da450fdcb21d";
}
