//! State descriptors accepted by `--state`.

use std::str::FromStr;

use npw_core::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateDescriptor {
    Number(usize),
    Coherent(C64),
    CoherentPhase { modulus: f64, phase: f64 },
    Thermal(f64),
    Random,
}

fn real(field: &str, what: &str) -> Result<f64, String> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("cannot read {what} from {field:?}"))
}

fn pair(args: &str, kind: &str) -> Result<(f64, f64), String> {
    match args.split(',').collect::<Vec<_>>().as_slice() {
        [a, b] => Ok((real(a, kind)?, real(b, kind)?)),
        _ => Err(format!("{kind} takes two comma-separated numbers, got {args:?}")),
    }
}

impl FromStr for StateDescriptor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "random" {
            return Ok(StateDescriptor::Random);
        }
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| format!("state descriptor {s:?} has no kind:args form"))?;
        match kind.trim() {
            "number" => args
                .trim()
                .parse::<usize>()
                .map(StateDescriptor::Number)
                .map_err(|_| format!("number state needs a non-negative integer, got {args:?}")),
            "coherent" => {
                let (re, im) = pair(args, "coherent")?;
                Ok(StateDescriptor::Coherent(C64::new(re, im)))
            }
            "cps" => {
                let (modulus, phase) = pair(args, "cps")?;
                Ok(StateDescriptor::CoherentPhase { modulus, phase })
            }
            "thermal" => Ok(StateDescriptor::Thermal(real(args, "thermal")?)),
            other => Err(format!(
                "unknown state kind {other:?} (expected number, coherent, cps, thermal or random)"
            )),
        }
    }
}
