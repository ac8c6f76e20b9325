//! Fixed-capacity arena of equal-size checkpoint slots.
//!
//! The arena is one contiguous allocation of exactly
//! `n_slots * slot_size` bytes; slot `i` occupies the byte range
//! `[i * slot_size, (i+1) * slot_size)`. The library never interprets slot
//! contents — serialization layout is owned by the checkpoint implementation.

use crate::error::{Error, Result};

/// Slot arena with byte-exact accounting.
#[derive(Debug)]
pub struct Storage {
    n_slots: usize,
    slot_size: usize,
    arena: Vec<u8>,
    written: Vec<bool>,
}

impl Storage {
    /// Allocate a zero-initialized arena of `n_ckp` slots of `size_ckp` bytes.
    pub fn new(n_ckp: usize, size_ckp: usize) -> Result<Self> {
        if n_ckp == 0 || size_ckp == 0 {
            return Err(Error::Config(format!(
                "storage requires n_ckp >= 1 and size_ckp >= 1 (got {n_ckp}, {size_ckp})"
            )));
        }
        let total = n_ckp
            .checked_mul(size_ckp)
            .ok_or(Error::Overflow("storage allocation size"))?;
        let mut arena = Vec::new();
        arena.try_reserve_exact(total).map_err(|_| {
            Error::Config(format!(
                "cannot allocate {total} bytes of checkpoint storage"
            ))
        })?;
        arena.resize(total, 0);
        Ok(Storage {
            n_slots: n_ckp,
            slot_size: size_ckp,
            arena,
            written: vec![false; n_ckp],
        })
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn slot_size(&self) -> usize {
        self.slot_size
    }

    /// Total bytes held by the arena; exactly `n_slots * slot_size`.
    pub fn allocated_bytes(&self) -> usize {
        self.arena.len()
    }

    /// High-water mark of distinct slots written so far.
    pub fn peak_live(&self) -> usize {
        self.written.iter().filter(|w| **w).count()
    }

    /// Read-only view of slot `i` (`slot_size` bytes).
    pub fn get_item(&self, i: usize) -> Result<&[u8]> {
        self.range(i).map(|(lo, hi)| &self.arena[lo..hi])
    }

    /// Writable view of slot `i`. The slot counts as live from here on.
    pub fn get_item_mut(&mut self, i: usize) -> Result<&mut [u8]> {
        let (lo, hi) = self.range(i)?;
        self.written[i] = true;
        Ok(&mut self.arena[lo..hi])
    }

    /// Whether slot `i` has ever been written.
    pub fn is_written(&self, i: usize) -> bool {
        self.written.get(i).copied().unwrap_or(false)
    }

    fn range(&self, i: usize) -> Result<(usize, usize)> {
        if i >= self.n_slots {
            return Err(Error::SlotOutOfRange {
                index: i,
                n_slots: self.n_slots,
            });
        }
        let lo = i * self.slot_size;
        Ok((lo, lo + self.slot_size))
    }
}

/// Bytes needed to hold the complete forward history:
/// `grid_points * timesteps * bytes_per_value`, overflow-checked.
///
/// Reported next to the checkpoint arena size to show the savings factor.
pub fn estimate_full_storage(
    grid_points: u64,
    timesteps: u64,
    bytes_per_value: u64,
) -> Result<u64> {
    if grid_points == 0 || timesteps == 0 || bytes_per_value == 0 {
        return Err(Error::Config(
            "estimate_full_storage requires positive inputs".into(),
        ));
    }
    grid_points
        .checked_mul(timesteps)
        .and_then(|x| x.checked_mul(bytes_per_value))
        .ok_or(Error::Overflow("estimate_full_storage"))
}
