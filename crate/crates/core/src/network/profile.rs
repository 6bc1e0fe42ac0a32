use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::{NetworkError, PipeSpec};

/// Tolerance between the profile's end-to-end elevation change and the
/// pipe's declared height difference, in meters.
pub const PROFILE_HEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("pipe {pipe}: height profile needs at least 2 points")]
    TooFewPoints { pipe: String },
    #[error("pipe {pipe}: profile arclength must start at 0 and increase strictly up to the pipe length")]
    BadArclength { pipe: String },
    #[error("pipe {pipe}: profile elevation change {profile} m does not match height_delta {declared} m")]
    EndpointMismatch { pipe: String, profile: f64, declared: f64 },
    #[error("height profile given for unknown pipe {pipe}")]
    UnknownPipe { pipe: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Splits a pipe into virtual pipes between consecutive local elevation
/// extrema of its height profile `(arclength, elevation)`.
///
/// Profile endpoints always count as extrema. Interior extrema are points
/// where consecutive elevation differences change sign strictly; zero
/// differences (plateaus) take the sign of the following nonzero difference.
pub fn expand_height_profile(pipe: &PipeSpec, profile: &[(f64, f64)]) -> Result<Vec<PipeSpec>, ProfileError> {
    let id = || pipe.id.clone();
    if profile.len() < 2 {
        return Err(ProfileError::TooFewPoints { pipe: id() });
    }
    let arc_tol = 1e-9 * pipe.length.max(1.0);
    let first = profile[0].0;
    let last = profile[profile.len() - 1].0;
    let increasing = profile.windows(2).all(|w| w[1].0 > w[0].0);
    if first.abs() > arc_tol || (last - pipe.length).abs() > arc_tol || !increasing {
        return Err(ProfileError::BadArclength { pipe: id() });
    }
    let rise = profile[profile.len() - 1].1 - profile[0].1;
    if (rise - pipe.height_delta).abs() > PROFILE_HEIGHT_TOLERANCE {
        return Err(ProfileError::EndpointMismatch {
            pipe: id(),
            profile: rise,
            declared: pipe.height_delta,
        });
    }

    let extrema = extremum_indices(profile);
    if extrema.len() == 2 {
        return Ok(alloc::vec![pipe.clone()]);
    }

    let segments = extrema.len() - 1;
    let mut out = Vec::with_capacity(segments);
    let mut length_sum = 0.0;
    let mut height_sum = 0.0;
    for k in 0..segments {
        let (a, b) = (extrema[k], extrema[k + 1]);
        let is_last = k + 1 == segments;
        // the last segment absorbs rounding so that sums are conserved
        let length = if is_last {
            pipe.length - length_sum
        } else {
            profile[b].0 - profile[a].0
        };
        let height_delta = if is_last {
            pipe.height_delta - height_sum
        } else {
            profile[b].1 - profile[a].1
        };
        length_sum += length;
        height_sum += height_delta;
        let from = if k == 0 { pipe.from.clone() } else { virtual_node(&pipe.id, k) };
        let to = if is_last { pipe.to.clone() } else { virtual_node(&pipe.id, k + 1) };
        out.push(PipeSpec {
            id: format!("{}.{}", pipe.id, k + 1),
            from,
            to,
            length,
            diameter: pipe.diameter,
            height_delta,
            roughness: pipe.roughness,
        });
    }
    Ok(out)
}

fn virtual_node(pipe: &str, k: usize) -> String {
    format!("{pipe}.n{k}")
}

fn extremum_indices(profile: &[(f64, f64)]) -> Vec<usize> {
    let diffs: Vec<f64> = profile.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let mut signs: Vec<i8> = diffs.iter().map(|&d| sign(d)).collect();
    // plateaus take the sign of the following segment; trailing plateaus the
    // preceding one
    let mut next = 0i8;
    for s in signs.iter_mut().rev() {
        if *s == 0 {
            *s = next;
        } else {
            next = *s;
        }
    }
    let mut prev = 0i8;
    for s in signs.iter_mut() {
        if *s == 0 {
            *s = prev;
        } else {
            prev = *s;
        }
    }
    let mut idx = alloc::vec![0];
    for i in 1..signs.len() {
        if signs[i] != 0 && signs[i - 1] != 0 && signs[i] != signs[i - 1] {
            idx.push(i);
        }
    }
    idx.push(profile.len() - 1);
    idx
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}
