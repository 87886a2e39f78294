//! Estimation (in progress).
