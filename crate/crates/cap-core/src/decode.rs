//! Decoding of score matrices into per-frame labels.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{argmax, log};
use crate::types::{ScoreMatrix, Segmentation, TemporalPath};
use crate::{Error, Result};

/// Log transition weights of the left-to-right path model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct DecodeConfig {
    pub stay_log_prob: f64,
    pub advance_log_prob: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        let half = log(0.5);
        Self {
            stay_log_prob: half,
            advance_log_prob: half,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        for v in [self.stay_log_prob, self.advance_log_prob] {
            if !v.is_finite() || v > 0.0 {
                return Err(Error::Config("transition log-probabilities must be finite and <= 0"));
            }
        }
        Ok(())
    }
}

/// A monotone alignment of frames to path positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Path position of every frame; starts at 0, ends at `T - 1`, and
    /// advances by at most one per frame.
    pub positions: Vec<usize>,
    pub log_score: f64,
}

/// Total log-score of an alignment: emissions of every frame plus one
/// transition weight per frame after the first.
pub fn alignment_score(scores: &ScoreMatrix, path: &TemporalPath, positions: &[usize], cfg: &DecodeConfig) -> f64 {
    let steps = path.steps();
    let mut total = 0.0;
    for (n, &p) in positions.iter().enumerate() {
        total += scores.get(steps[p], n);
        if n > 0 {
            total += if p == positions[n - 1] {
                cfg.stay_log_prob
            } else {
                cfg.advance_log_prob
            };
        }
    }
    total
}

/// Best monotone alignment of the frames of `scores` along `path`, in
/// `O(N * T)`. Equal scores prefer staying over advancing, which puts
/// boundaries as late as possible.
pub fn viterbi_align(scores: &ScoreMatrix, path: &TemporalPath, cfg: &DecodeConfig) -> Result<Alignment> {
    cfg.validate()?;
    let steps = path.steps();
    let (n_frames, t_len) = (scores.len(), steps.len());
    if n_frames < t_len {
        return Err(Error::PathTooLong {
            steps: t_len,
            frames: n_frames,
        });
    }
    if let Some(&id) = steps.iter().find(|&&k| k >= scores.k()) {
        return Err(Error::ClusterOutOfRange { id, k: scores.k() });
    }

    // Best score of frames n.. given frame n sits at position p, filled from
    // the last frame backwards so that ties can be settled in favour of
    // staying while walking forwards.
    let mut next = vec![f64::NEG_INFINITY; t_len];
    let mut cur = vec![f64::NEG_INFINITY; t_len];
    let mut advance = vec![false; n_frames * t_len];
    next[t_len - 1] = scores.get(steps[t_len - 1], n_frames - 1);

    for n in (0..n_frames - 1).rev() {
        // frame n can hold position p only if p <= n and the remaining
        // frames can still reach the last position
        let lo = (t_len + n).saturating_sub(n_frames);
        let hi = n.min(t_len - 1);
        cur.fill(f64::NEG_INFINITY);
        for p in lo..=hi {
            let stay = cfg.stay_log_prob + next[p];
            let adv = if p + 1 < t_len {
                cfg.advance_log_prob + next[p + 1]
            } else {
                f64::NEG_INFINITY
            };
            let take_advance = adv > stay;
            advance[n * t_len + p] = take_advance;
            cur[p] = scores.get(steps[p], n) + if take_advance { adv } else { stay };
        }
        core::mem::swap(&mut next, &mut cur);
    }

    let log_score = next[0];
    let mut positions = Vec::with_capacity(n_frames);
    let mut p = 0;
    for n in 0..n_frames {
        positions.push(p);
        if n + 1 < n_frames && advance[n * t_len + p] {
            p += 1;
        }
    }
    debug_assert_eq!(p, t_len - 1);
    Ok(Alignment {
        positions,
        log_score,
    })
}

/// Labels every frame with the cluster at its best path position.
pub fn viterbi_decode(scores: &ScoreMatrix, path: &TemporalPath, cfg: &DecodeConfig) -> Result<Segmentation> {
    let alignment = viterbi_align(scores, path, cfg)?;
    let steps = path.steps();
    let labels = alignment.positions.iter().map(|&p| steps[p]).collect();
    Ok(Segmentation::new(scores.sequence_id(), labels))
}

/// Unconstrained baseline: each frame takes its best-scoring cluster, ties to
/// the lower id.
pub fn argmax_decode(scores: &ScoreMatrix) -> Segmentation {
    let labels = (0..scores.len())
        .map(|n| argmax(scores.values().column(n)).unwrap_or(0))
        .collect();
    Segmentation::new(scores.sequence_id(), labels)
}
