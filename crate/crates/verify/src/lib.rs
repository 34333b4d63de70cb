//! Holds no code; the acceptance gate lives in `tests/acceptance.rs`.
