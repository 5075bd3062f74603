//! Periodic observation source and the transmitter's one-deep buffer.
//!
//! The monitored scene is captured every `interval` seconds; capture `n`
//! happens at `t = n * interval` and is tagged with that generation time.
//! Images come from a dataset cycled in order or reshuffled per pass.
//!
//! The transmit queue holds exactly one waiting sample. A newer capture
//! displaces an older one that is still waiting — stale data has no value
//! worth queueing behind fresher data — but a sample already on the air is
//! never recalled.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// How the dataset supplies images to successive captures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleOrder {
    /// `image_id = n mod dataset_len`.
    #[default]
    Cyclic,
    /// A fresh seeded permutation of the dataset on every full pass.
    Shuffled,
}

/// One capture: when it was taken and which dataset image it shows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Capture counter (0-based).
    pub index: u64,
    /// Generation timestamp `n * interval`, in seconds.
    pub generation_time: f64,
    /// Dataset index of the captured image.
    pub image_id: usize,
}

/// Deterministic periodic sampler over a finite dataset.
#[derive(Debug, Clone)]
pub struct PeriodicSource {
    interval: f64,
    dataset_len: usize,
    order: SampleOrder,
    seed: u64,
}

impl PeriodicSource {
    pub fn new(interval: f64, dataset_len: usize, order: SampleOrder, seed: u64) -> Result<Self> {
        if !(interval > 0.0) || !interval.is_finite() {
            return Err(Error::InvalidParameter {
                name: "interval",
                value: interval,
                constraint: "finite and > 0 seconds",
            });
        }
        if dataset_len == 0 {
            return Err(Error::EmptyInput { what: "dataset" });
        }
        Ok(PeriodicSource {
            interval,
            dataset_len,
            order,
            seed,
        })
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    /// The `n`-th capture. Pure: the same `n` always yields the same
    /// record, so the simulation can query ahead without mutating anything.
    pub fn sample_at(&self, n: u64) -> SampleRecord {
        let image_id = match self.order {
            SampleOrder::Cyclic => (n % self.dataset_len as u64) as usize,
            SampleOrder::Shuffled => {
                let pass = n / self.dataset_len as u64;
                let offset = (n % self.dataset_len as u64) as usize;
                let mut ids: Vec<usize> = (0..self.dataset_len).collect();
                let mut rng = seeds::stream(self.seed, "sample-shuffle", pass);
                ids.shuffle(&mut rng);
                ids[offset]
            }
        };
        SampleRecord {
            index: n,
            generation_time: n as f64 * self.interval,
            image_id,
        }
    }
}

/// One-deep preemptive queue: the freshest waiting sample wins.
#[derive(Debug, Clone, Default)]
pub struct SingleSlotBuffer {
    slot: Option<SampleRecord>,
}

impl SingleSlotBuffer {
    pub fn new() -> Self {
        SingleSlotBuffer { slot: None }
    }

    /// Insert a new capture, returning whatever it displaced.
    pub fn offer(&mut self, sample: SampleRecord) -> Option<SampleRecord> {
        self.slot.replace(sample)
    }

    /// Remove and return the waiting sample, leaving the buffer empty.
    pub fn take(&mut self) -> Option<SampleRecord> {
        self.slot.take()
    }

    /// The waiting sample, if any, without removing it.
    pub fn peek(&self) -> Option<&SampleRecord> {
        self.slot.as_ref()
    }

    pub fn is_occupied(&self) -> bool {
        self.slot.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_times_are_multiples_of_the_interval() {
        let src = PeriodicSource::new(2.0, 3, SampleOrder::Cyclic, 0).unwrap();
        for n in 0..7 {
            let s = src.sample_at(n);
            assert_eq!(s.index, n);
            assert_eq!(s.generation_time, n as f64 * 2.0);
        }
    }

    #[test]
    fn cyclic_order_wraps_around() {
        let src = PeriodicSource::new(1.0, 3, SampleOrder::Cyclic, 0).unwrap();
        let ids: Vec<usize> = (0..7).map(|n| src.sample_at(n).image_id).collect();
        assert_eq!(ids, vec![0, 1, 2, 0, 1, 2, 0]);
    }

    #[test]
    fn shuffled_order_is_a_permutation_per_pass_and_deterministic() {
        let src = PeriodicSource::new(1.0, 5, SampleOrder::Shuffled, 11).unwrap();
        let again = PeriodicSource::new(1.0, 5, SampleOrder::Shuffled, 11).unwrap();
        for pass in 0..3u64 {
            let mut ids: Vec<usize> = (0..5)
                .map(|k| src.sample_at(pass * 5 + k).image_id)
                .collect();
            let replay: Vec<usize> = (0..5)
                .map(|k| again.sample_at(pass * 5 + k).image_id)
                .collect();
            assert_eq!(ids, replay, "same seed must replay the same order");
            ids.sort_unstable();
            assert_eq!(ids, vec![0, 1, 2, 3, 4], "pass {pass} is not a permutation");
        }
        let other = PeriodicSource::new(1.0, 5, SampleOrder::Shuffled, 12).unwrap();
        let a: Vec<usize> = (0..10).map(|n| src.sample_at(n).image_id).collect();
        let b: Vec<usize> = (0..10).map(|n| other.sample_at(n).image_id).collect();
        assert_ne!(a, b, "different seeds should shuffle differently");
    }

    #[test]
    fn rejects_bad_interval_and_empty_dataset() {
        assert!(PeriodicSource::new(0.0, 3, SampleOrder::Cyclic, 0).is_err());
        assert!(PeriodicSource::new(-1.0, 3, SampleOrder::Cyclic, 0).is_err());
        assert!(PeriodicSource::new(1.0, 0, SampleOrder::Cyclic, 0).is_err());
    }

    #[test]
    fn buffer_keeps_only_the_freshest() {
        let src = PeriodicSource::new(1.0, 10, SampleOrder::Cyclic, 0).unwrap();
        let mut buf = SingleSlotBuffer::new();
        assert!(!buf.is_occupied());
        assert_eq!(buf.offer(src.sample_at(0)), None);
        let displaced = buf.offer(src.sample_at(1)).expect("older sample displaced");
        assert_eq!(displaced.index, 0);
        let taken = buf.take().expect("fresh sample present");
        assert_eq!(taken.index, 1);
        assert!(buf.take().is_none(), "take drains the slot");
    }
}
