//! Tampering function classes: layered AND/OR circuits, decision trees,
//! local functions, and the conversions between them.

pub mod collapse;
pub mod family;
pub mod general;
pub mod json;
pub mod layered;
pub mod local;
pub mod table;
pub mod tree;

pub use collapse::{collapse, collapse_family, CollapseMode};
pub use family::{BoolFn, FunctionFamily};
pub use general::{GNode, GeneralCircuit};
pub use layered::{Circuit, GateLayer, Lit, LitLayer, Op};
pub use local::LocalFn;
pub use table::TruthTable;
pub use tree::DecisionTree;
