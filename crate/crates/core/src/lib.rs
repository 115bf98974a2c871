pub mod access;
pub mod classify;
pub mod cli;
pub mod codebook;
pub mod entropy_lp;
pub mod formats;
pub mod par;
pub mod qssverify;
pub mod qstate;
pub mod uniformity;
