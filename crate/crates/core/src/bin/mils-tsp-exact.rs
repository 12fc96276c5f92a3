//! Exact TSP solver speaking the single-tour improver protocol:
//! `mils-tsp-exact in.tsp out.tour`. Node 1 of the input is the depot.

use std::process::ExitCode;

use mils_core::exact::held_karp;
use mils_core::Instance;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.len() != 3 {
        eprintln!("usage: {} <in.tsp> <out.tour>", args[0]);
        return ExitCode::from(2);
    }
    let inst = match Instance::from_file(&args[1], None) {
        Ok(inst) => inst,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let cities: Vec<usize> = (1..=inst.num_cities()).collect();
    let (_, order) = match held_karp(&inst, &cities) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let mut out = String::from("1\n");
    for v in order {
        out.push_str(&format!("{}\n", v + 1));
    }
    out.push_str("-1\n");
    if let Err(e) = std::fs::write(&args[2], out) {
        eprintln!("{}: {e}", args[2]);
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
