//! Increment laws, exact transition kernels and the kernel conditions behind the
//! two-trap comparison.

mod conditions;
mod fourier;
mod kernel;
mod pmf;
mod tail;

pub use conditions::{
    check_conditions, check_mono_conditions, check_moreau_conditions, Condition, ConditionMode,
    ConditionReport, ConditionRow, ConditionWitness,
};
pub use fourier::{characteristic, fourier_crosscheck, torus_kernel, TorusKernel};
pub use kernel::{
    check_kernel, compose, kernel_series, kernel_series_in, n_step_kernel, n_step_kernel_with,
    paired_kernel, BTreeKernel, KernelStepper, StepKernel,
};
pub use pmf::{validate_class, ClassTag, IncrementPmf, PmfDescription, StepSampler, WalkClass};
pub use tail::{tail_sum, tail_value, TailSum};
