//! Greedy bit allocation under a mean-BER constraint.
//!
//! All subcarriers start at 64-QAM. While the bit-weighted mean BER exceeds
//! the target, the active subcarrier with the highest BER (lowest index on
//! ties) drops one constellation step; BPSK drops to nulled. If every
//! subcarrier ends up nulled the transmission stops.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{self, Constellation, SubcarrierLink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AllocationStatus {
    Met,
    TransmissionStopped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub loads: Vec<Constellation>,
    /// `BER_k` for active subcarriers, `None` for nulled ones.
    pub per_ber: Vec<Option<f64>>,
    /// Bit-weighted mean BER; `None` when nothing is loaded.
    pub mean_ber: Option<f64>,
    pub throughput_bits: u32,
    pub status: AllocationStatus,
    /// Number of single-step constellation reductions performed.
    pub iterations: u32,
}

/// One reduction step, for debugging and trace comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: u32,
    pub victim: usize,
    pub constellation: Constellation,
    /// Mean BER after the step (`None` once everything is nulled).
    pub mean_ber: Option<f64>,
}

/// Bit-weighted mean BER over active subcarriers. Entries of `per_ber` at
/// nulled positions are ignored.
pub fn mean_ber(loads: &[Constellation], per_ber: &[f64]) -> Result<f64> {
    let (num, bits) = loads
        .iter()
        .zip(per_ber)
        .filter(|(c, _)| c.is_active())
        .fold((0.0, 0u64), |(s, b), (c, &ber)| {
            (s + c.bits() as f64 * ber, b + c.bits() as u64)
        });
    if bits == 0 {
        return Err(Error::Domain("mean BER needs at least one loaded subcarrier"));
    }
    Ok(num / bits as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapKey {
    ber: f64,
    index: Reverse<usize>,
}

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ber
            .total_cmp(&other.ber)
            .then_with(|| self.index.cmp(&other.index))
    }
}

pub fn allocate(links: &[SubcarrierLink], target_ber: f64, cp_loss: f64) -> AllocationResult {
    run(links, target_ber, cp_loss, None)
}

/// Like [`allocate`], also returning every reduction step.
pub fn allocate_traced(
    links: &[SubcarrierLink],
    target_ber: f64,
    cp_loss: f64,
) -> (AllocationResult, Vec<TraceStep>) {
    let mut trace = Vec::new();
    let r = run(links, target_ber, cp_loss, Some(&mut trace));
    (r, trace)
}

fn ber_of(c: Constellation, sinr: f64, cp_loss: f64) -> f64 {
    // active constellation, non-negative SINR: cannot fail
    link::ber(c, sinr, cp_loss).unwrap_or(0.5)
}

fn run(
    links: &[SubcarrierLink],
    target_ber: f64,
    cp_loss: f64,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> AllocationResult {
    let n = links.len();
    let mut loads = vec![Constellation::Qam64; n];
    let mut bers: Vec<f64> = links
        .iter()
        .map(|l| ber_of(Constellation::Qam64, l.sinr.max(0.0), cp_loss))
        .collect();
    let mut heap: BinaryHeap<HeapKey> = bers
        .iter()
        .enumerate()
        .map(|(k, &ber)| HeapKey {
            ber,
            index: Reverse(k),
        })
        .collect();
    let mut weighted: f64 = bers.iter().map(|b| 6.0 * b).sum();
    let mut bits: u64 = 6 * n as u64;
    let mut iterations = 0u32;

    let status = loop {
        if bits == 0 {
            break AllocationStatus::TransmissionStopped;
        }
        if weighted / bits as f64 <= target_ber {
            // confirm against a fresh sum so drift in the running total can
            // never accept an infeasible allocation
            weighted = exact_weighted(&loads, &bers);
            if weighted / bits as f64 <= target_ber {
                break AllocationStatus::Met;
            }
        }
        let Some(HeapKey { index: Reverse(k), .. }) = heap.pop() else {
            break AllocationStatus::TransmissionStopped;
        };
        let old = loads[k];
        let new = old.reduce();
        weighted -= old.bits() as f64 * bers[k];
        bits -= (old.bits() - new.bits()) as u64;
        loads[k] = new;
        if new.is_active() {
            bers[k] = ber_of(new, links[k].sinr.max(0.0), cp_loss);
            weighted += new.bits() as f64 * bers[k];
            heap.push(HeapKey {
                ber: bers[k],
                index: Reverse(k),
            });
        }
        if bits == 0 {
            weighted = 0.0;
        }
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceStep {
                iteration: iterations,
                victim: k,
                constellation: new,
                mean_ber: (bits > 0).then(|| weighted / bits as f64),
            });
        }
    };

    let per_ber: Vec<Option<f64>> = loads
        .iter()
        .zip(&bers)
        .map(|(c, &b)| c.is_active().then_some(b))
        .collect();
    let mean = mean_ber(&loads, &bers).ok();
    AllocationResult {
        loads,
        per_ber,
        mean_ber: mean,
        throughput_bits: bits as u32,
        status,
        iterations,
    }
}

fn exact_weighted(loads: &[Constellation], bers: &[f64]) -> f64 {
    loads
        .iter()
        .zip(bers)
        .filter(|(c, _)| c.is_active())
        .map(|(c, b)| c.bits() as f64 * b)
        .sum()
}
