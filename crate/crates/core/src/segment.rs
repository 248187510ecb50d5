//! Fixed-length database windows and variable-length query segments.

use thiserror::Error;

use crate::sequence::Span;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentationError {
    #[error("minimum match length must be at least 2, got {0}")]
    LambdaTooSmall(usize),
    #[error("length shift {lambda0} must be smaller than the window length {window}")]
    ShiftTooLarge { lambda0: usize, window: usize },
}

/// Minimum match length `lambda`, maximum length shift `lambda0`, and the derived window length
/// `floor(lambda / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SegmentationParams {
    lambda: usize,
    lambda0: usize,
    window: usize,
}

impl SegmentationParams {
    pub fn new(lambda: usize, lambda0: usize) -> Result<Self, SegmentationError> {
        if lambda < 2 {
            return Err(SegmentationError::LambdaTooSmall(lambda));
        }
        let window = lambda / 2;
        if lambda0 >= window {
            return Err(SegmentationError::ShiftTooLarge { lambda0, window });
        }
        Ok(SegmentationParams { lambda, lambda0, window })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn lambda0(&self) -> usize {
        self.lambda0
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Same `lambda`, different shift budget.
    pub fn with_lambda0(&self, lambda0: usize) -> Result<Self, SegmentationError> {
        SegmentationParams::new(self.lambda, lambda0)
    }

    /// Inclusive range of query segment lengths.
    pub fn segment_lengths(&self) -> (usize, usize) {
        (self.window - self.lambda0, self.window + self.lambda0)
    }
}

/// A database window: `len` elements of sequence `seq` starting at 1-based `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowRef {
    pub seq: u32,
    pub start: u32,
    pub len: u32,
}

impl WindowRef {
    pub fn span(&self) -> Span {
        Span::new(self.start as usize, (self.start + self.len - 1) as usize)
    }
}

/// Non-overlapping windows at offsets `0, l, 2l, ...`; a trailing remainder shorter than `l`
/// is left uncovered.
pub fn partition_windows(seq: u32, seq_len: usize, p: &SegmentationParams) -> Vec<WindowRef> {
    let l = p.window;
    (0..seq_len / l)
        .map(|i| WindowRef { seq, start: (i * l + 1) as u32, len: l as u32 })
        .collect()
}

/// A contiguous query span whose length lies within the segment length bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuerySegment {
    pub span: Span,
}

/// Every span of a query of length `query_len` with length in `[l - lambda0, l + lambda0]`,
/// ordered by start, then length.
pub fn extract_query_segments(query_len: usize, p: &SegmentationParams) -> Vec<QuerySegment> {
    let (lo, hi) = p.segment_lengths();
    let mut out = Vec::with_capacity(segment_count(query_len, p));
    for start in 1..=query_len {
        for len in lo..=hi {
            let end = start + len - 1;
            if end > query_len {
                break;
            }
            out.push(QuerySegment { span: Span::new(start, end) });
        }
    }
    out
}

/// Closed form of the number of segments [`extract_query_segments`] yields.
pub fn segment_count(query_len: usize, p: &SegmentationParams) -> usize {
    let (lo, hi) = p.segment_lengths();
    (lo..=hi).map(|len| (query_len + 1).saturating_sub(len)).sum()
}
