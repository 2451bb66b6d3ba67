//! `ymqm build`: assemble the model operators and persist their Kronecker
//! structure as a JSON snapshot.

use serde::Serialize;
use ymqm_core::model::{
    assemble_4h, assemble_charge, assemble_charge_squared, size_operator, ModelSpec,
};
use ymqm_core::tensor::TensorOperator;

use super::CommandContext;

#[derive(Serialize)]
struct OperatorSnapshot<'a> {
    dim: usize,
    h0: usize,
    l0: usize,
    hamiltonian_4h: &'a TensorOperator,
    charge: &'a TensorOperator,
    charge_squared: &'a TensorOperator,
    size: &'a TensorOperator,
}

pub fn run(ctx: &CommandContext) -> Result<(), String> {
    let manifest = ctx.manifest("build", &[]).map_err(|e| e.to_string())?;
    let spec: ModelSpec = ctx.config.model.to_spec();
    spec.validate().map_err(|e| e.to_string())?;
    let h4 = assemble_4h(&spec).map_err(|e| e.to_string())?;
    let charge = assemble_charge(&spec).map_err(|e| e.to_string())?;
    let charge_squared = assemble_charge_squared(&spec).map_err(|e| e.to_string())?;
    let size = size_operator(&spec).map_err(|e| e.to_string())?;
    let snapshot = OperatorSnapshot {
        dim: h4.dim(),
        h0: spec.h0(),
        l0: spec.l0(),
        hamiltonian_4h: &h4,
        charge: &charge,
        charge_squared: &charge_squared,
        size: &size,
    };
    let path = ctx.path("operators.json");
    super::write_json(&path, &snapshot).map_err(|e| e.to_string())?;
    println!(
        "build: dim {} = {}^2 x {}; 4H has {} Kronecker terms -> {}",
        h4.dim(),
        spec.h0(),
        spec.l0(),
        h4.terms().len(),
        path.display()
    );
    manifest.finalize(&[path]).map_err(|e| e.to_string())
}
