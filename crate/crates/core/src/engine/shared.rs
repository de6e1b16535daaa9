//! Concurrent writes into disjoint parts of one buffer.

use std::marker::PhantomData;
use std::ops::{Deref, DerefMut, Range};

#[cfg(debug_assertions)]
use std::sync::Mutex;

/// Hands out non-overlapping mutable sub-slices of a borrowed buffer.
///
/// Debug builds track live claims and panic on overlap.
pub struct DisjointSlice<'a, T> {
    ptr: *mut T,
    len: usize,
    #[cfg(debug_assertions)]
    claims: Mutex<Vec<Range<usize>>>,
    _borrow: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for DisjointSlice<'_, T> {}
unsafe impl<T: Send> Sync for DisjointSlice<'_, T> {}

impl<'a, T> DisjointSlice<'a, T> {
    pub fn new(slice: &'a mut [T]) -> Self {
        DisjointSlice {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            #[cfg(debug_assertions)]
            claims: Mutex::new(Vec::new()),
            _borrow: PhantomData,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Borrows `range` mutably.
    ///
    /// # Safety
    /// Ranges claimed while another claim is alive must not overlap it.
    pub unsafe fn claim(&self, range: Range<usize>) -> Claim<'_, 'a, T> {
        assert!(
            range.start <= range.end && range.end <= self.len,
            "claim {range:?} out of bounds"
        );
        #[cfg(debug_assertions)]
        {
            let mut claims = self.claims.lock().unwrap_or_else(|p| p.into_inner());
            if let Some(other) = claims.iter().find(|c| c.start < range.end && range.start < c.end) {
                panic!("overlapping destination claims {other:?} and {range:?}");
            }
            claims.push(range.clone());
        }
        Claim {
            owner: self,
            slice: std::slice::from_raw_parts_mut(self.ptr.add(range.start), range.len()),
            #[cfg(debug_assertions)]
            range,
        }
    }
}

pub struct Claim<'c, 'a, T> {
    #[cfg_attr(not(debug_assertions), allow(dead_code))]
    owner: &'c DisjointSlice<'a, T>,
    slice: &'c mut [T],
    #[cfg(debug_assertions)]
    range: Range<usize>,
}

impl<T> Deref for Claim<'_, '_, T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        self.slice
    }
}

impl<T> DerefMut for Claim<'_, '_, T> {
    fn deref_mut(&mut self) -> &mut [T] {
        self.slice
    }
}

impl<T> Drop for Claim<'_, '_, T> {
    fn drop(&mut self) {
        #[cfg(debug_assertions)]
        {
            let mut claims = self.owner.claims.lock().unwrap_or_else(|p| p.into_inner());
            if let Some(at) = claims.iter().position(|c| *c == self.range) {
                claims.swap_remove(at);
            }
        }
    }
}
