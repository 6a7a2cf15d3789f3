//! In-place Walsh–Hadamard transform over complex amplitudes.
//!
//! The transform is the tensor product of single-qubit Hadamards. It maps the
//! z basis onto the x basis, which is what turns the `σˣσˣ` coupling into a
//! diagonal phase.

use num_complex::Complex64;

use crate::exec::{self, Exec};

/// Butterfly levels with stride below this many elements are done inside a
/// contiguous block; larger strides pair up whole blocks.
const BLOCK: usize = 1 << 11;

/// Unnormalized transform: `x ← W x` with `W² = 2^N · I`.
pub fn transform_unnormalized(exec: Exec, data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let block = BLOCK.min(n);

    exec::for_each_chunk_mut(exec, data, block, |_, chunk| butterflies_in_block(chunk));

    let mut half = block;
    while half < n {
        let span = 2 * half;
        if exec.is_parallel() && n / span < 4 {
            // few wide spans: split each span into matching slices
            for pair in data.chunks_mut(span) {
                let (lo, hi) = pair.split_at_mut(half);
                exec::zip_chunks_mut(exec, lo, hi, block, butterfly_slices);
            }
        } else {
            exec::for_each_chunk_mut(exec, data, span, |_, pair| {
                let (lo, hi) = pair.split_at_mut(half);
                butterfly_slices(lo, hi);
            });
        }
        half = span;
    }
}

/// Normalized transform `H^{⊗N}`; an involution.
pub fn transform(exec: Exec, data: &mut [Complex64]) {
    transform_unnormalized(exec, data);
    let scale = 1.0 / (data.len() as f64).sqrt();
    exec::for_each_chunk_mut(exec, data, exec::CHUNK, |_, chunk| {
        chunk.iter_mut().for_each(|x| *x *= scale)
    });
}

#[inline]
fn butterfly_slices(lo: &mut [Complex64], hi: &mut [Complex64]) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

fn butterflies_in_block(block: &mut [Complex64]) {
    let n = block.len();
    let mut half = 1;
    while half < n {
        for pair in block.chunks_mut(2 * half) {
            let (lo, hi) = pair.split_at_mut(half);
            butterfly_slices(lo, hi);
        }
        half *= 2;
    }
}
