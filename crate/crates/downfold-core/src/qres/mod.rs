//! Block-encoding circuits for the factorized residuals and their resource
//! accounting.

pub mod encoder;
pub mod estimate;
pub mod ir;
pub mod layout;
pub mod theorems;

pub use encoder::{build_block_encoder, encoder_readout};
pub use estimate::{
    compare_tabulated, estimate_expression, estimate_total, tabulated_rows, CostModel, TableComparison, ResourceEstimate,
};
pub use ir::{Gate, GateIR};
pub use layout::{Register, RegisterLayout};
pub use theorems::{
    verify_dot, verify_hadamard, verify_matmul, verify_tensor_contraction, verify_tensor_product, MatmulVariant,
    OverlapReport,
};
