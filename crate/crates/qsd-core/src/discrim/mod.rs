//! Discrimination programs (in progress).
