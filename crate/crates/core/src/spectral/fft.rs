//! Multi-dimensional complex FFT assembled from rustfft line transforms.

use rustfft::num_complex::Complex64;
use rustfft::Fft;

use super::grid::PeriodicGrid;
use crate::exec::{for_each_chunk_mut, Execution};

/// Lines handed to one task when transforming a contiguous axis.
const LINES_PER_TASK: usize = 16;

/// In-place forward transform, unnormalised.
pub(crate) fn forward(grid: &PeriodicGrid, data: &mut [Complex64]) {
    for axis in 0..grid.dim() {
        transform_axis(grid, data, axis, &grid.forward[axis]);
    }
}

/// In-place inverse transform including the 1/N normalisation.
pub(crate) fn inverse(grid: &PeriodicGrid, data: &mut [Complex64]) {
    for axis in 0..grid.dim() {
        transform_axis(grid, data, axis, &grid.inverse[axis]);
    }
    let scale = 1.0 / grid.len() as f64;
    for_each_chunk_mut(grid.execution(), data, crate::exec::CHUNK, |_, c| c.iter_mut().for_each(|z| *z *= scale));
}

fn transform_axis(grid: &PeriodicGrid, data: &mut [Complex64], axis: usize, fft: &std::sync::Arc<dyn Fft<f64>>) {
    let modes = grid.modes();
    let n = modes[axis];
    let inner: usize = modes[axis + 1..].iter().product();
    let outer: usize = modes[..axis].iter().product();
    let exec = grid.execution();

    if inner == 1 {
        for_each_chunk_mut(exec, data, n * LINES_PER_TASK, |_, c| fft.process(c));
        return;
    }

    let block = n * inner;
    if outer > 1 {
        // Independent blocks: each task transposes its own block.
        for_each_chunk_mut(exec, data, block, |_, b| strided_block(b, n, inner, fft.as_ref(), Execution::Sequential));
    } else {
        strided_block(data, n, inner, fft.as_ref(), exec);
    }
}

/// Transforms the `n`-long columns of a row-major `[n][inner]` block by
/// transposing into scratch, running contiguous FFTs and transposing back.
fn strided_block(block: &mut [Complex64], n: usize, inner: usize, fft: &dyn Fft<f64>, exec: Execution) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); block.len()];
    {
        let src: &[Complex64] = block;
        for_each_chunk_mut(exec, &mut scratch, n * LINES_PER_TASK, |ci, rows| {
            for (r, row) in rows.chunks_mut(n).enumerate() {
                let col = ci * LINES_PER_TASK + r;
                for (i, z) in row.iter_mut().enumerate() {
                    *z = src[i * inner + col];
                }
            }
            fft.process(rows);
        });
    }
    let src: &[Complex64] = &scratch;
    for_each_chunk_mut(exec, block, inner, |i, row| {
        for (col, z) in row.iter_mut().enumerate() {
            *z = src[col * n + i];
        }
    });
}
