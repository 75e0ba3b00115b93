//! Acceptance gate: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use skillcheck::compile::CompiledSkillset;
use skillcheck::ltl::{model_check, parse_ltl, Engine, LtlFormula, Verdict};
use skillcheck::lts::Network;
use skillcheck::skill_lang::{format_skillset, parse_skillset, CUSTOM_ROBOT};
use skillcheck::system::ClosedSystem;

type Outcome = Result<String, String>;
type Closer = fn(&CompiledSkillset) -> ClosedSystem;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prop(text: &str) -> LtlFormula {
    parse_ltl(text).expect("fixed property parses")
}

/// Compiles, closes and checks from scratch, timing the whole pipeline.
fn pipeline(
    close: impl Fn(&CompiledSkillset) -> ClosedSystem,
    text: &str,
) -> Result<(Network, Verdict, Duration), String> {
    let start = Instant::now();
    let c = listing();
    let net = close(&c).network;
    let v = check_both(&net, &prop(text))?;
    Ok((net, v, start.elapsed()))
}

fn verdict_a() -> Outcome {
    let (net, v, t) = pipeline(abstract_system, P1)?;
    ensure(!v.holds(), || "property holds".into())?;
    let goto = net.component_index("goto").unwrap();
    let running = net.components()[goto].state_index("Running").unwrap() as u32;
    let lasso = v.lasso().unwrap();
    ensure(
        lasso.cycle.iter().any(|s| s.state.local(goto) == running),
        || "no goto @ Running state in the cycle".into(),
    )?;
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    ensure(v.states_explored < 100_000, || {
        format!("{} states explored", v.states_explored)
    })?;
    Ok(format!(
        "violated, cycle of {} through goto @ Running, {} states, {t:.2?}",
        lasso.cycle.len(),
        v.states_explored
    ))
}

fn verdict_b() -> Outcome {
    let (_, v, t) = pipeline(abstract_system, P2)?;
    ensure(v.holds(), || "property violated".into())?;
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("holds, {} states, {t:.2?}", v.states_explored))
}

fn verdict_c() -> Outcome {
    let (_, v, t) = pipeline(|c| refined_system(c, 6, 2), P1)?;
    ensure(v.holds(), || "property violated at Bmax=6, Dmax=2".into())?;
    let (_, big, tb) = pipeline(|c| refined_system(c, 20, 5), P1)?;
    ensure(big.holds(), || {
        "property violated at Bmax=20, Dmax=5".into()
    })?;
    ensure(tb < Duration::from_secs(60), || {
        format!("Bmax=20, Dmax=5 took {tb:?}")
    })?;
    Ok(format!(
        "holds at (6,2) with {} states in {t:.2?}; at (20,5) with {} states in {tb:.2?}",
        v.states_explored, big.states_explored
    ))
}

fn executability() -> Outcome {
    let (net, v, _) = pipeline(abstract_system, EXECUTABLE)?;
    ensure(!v.holds(), || "goto @ Running is unreachable".into())?;
    let goto = net.component_index("goto").unwrap();
    let running = net.components()[goto].state_index("Running").unwrap() as u32;
    let lasso = v.lasso().unwrap();
    let witness = lasso
        .states()
        .position(|g| g.local(goto) == running)
        .ok_or("lasso never reaches goto @ Running")?;
    Ok(format!("goto @ Running reached after {witness} steps"))
}

fn semantics_oracle() -> Outcome {
    let mut r = rng(0x5e3a);
    for i in 0..500 {
        let comps = random_components(&mut r, 3, 5, 6);
        for stutter in [false, true] {
            compare_semantics(comps.clone(), stutter)
                .map_err(|e| format!("network {i} (stutter {stutter}): {e}"))?;
        }
    }
    Ok("500 networks, with and without stutter closure".into())
}

fn cross_validation() -> Outcome {
    let mut r = rng(0xc405);
    let mut holds = 0;
    for i in 0..500 {
        holds += usize::from(engine_trial(&mut r).map_err(|e| format!("pair {i}: {e}"))?);
    }
    let c = listing();
    let systems = [
        abstract_system(&c),
        refined_system(&c, 6, 2),
        refined_system(&c, 2, 1),
        refined_system(&c, 20, 5),
    ];
    let mut bundled = 0;
    for sys in &systems {
        for p in [
            P1,
            P2,
            EXECUTABLE,
            "G F (battery @ Normal)",
            "G (goto @ Running -> F (goto @ Ready))",
        ] {
            check_both(&sys.network, &prop(p))?;
            bundled += 1;
        }
    }
    Ok(format!(
        "500 random pairs ({holds} hold, {} violated), {bundled} bundled checks",
        500 - holds
    ))
}

fn translation() -> Outcome {
    let formulas = formula_enumeration(220, 4);
    ensure(
        formulas
            .iter()
            .all(|f| f.depth() <= 4 && f.atoms().len() <= 3),
        || "enumeration exceeds depth 4 or 3 atoms".into(),
    )?;
    let mut words = 0;
    for f in &formulas {
        words += translation_agrees(f, 6)?;
    }
    Ok(format!("{} formulas, {words} lasso words", formulas.len()))
}

fn refinement() -> Outcome {
    let c = listing();
    let abs = abstract_system(&c);
    let refined = refined_system(&c, 6, 2);
    let visited = trace_inclusion(&refined.network, &abs.network, &refined.internal_events, 20)
        .map_err(|t| format!("abstract closure cannot follow: {}", t.join(" ")))?;
    let hidden: Vec<&str> = refined.internal_events.iter().map(|e| e.name()).collect();
    Ok(format!(
        "depth 20, {visited} pairs, hidden events {}",
        hidden.join(", ")
    ))
}

fn round_trip_and_determinism() -> Outcome {
    let ast = parse_skillset(CUSTOM_ROBOT).map_err(|d| format!("{d:?}"))?;
    let text = format_skillset(&ast);
    let back = parse_skillset(&text).map_err(|d| format!("{d:?}"))?;
    ensure(
        serde_json::to_value(&ast).unwrap() == serde_json::to_value(&back).unwrap()
            && format_skillset(&back) == text,
        || "listing does not round-trip".into(),
    )?;
    let runs: [(&str, Closer, &str); 3] = [
        ("A", abstract_system, P1),
        ("B", abstract_system, P2),
        ("C", |c| refined_system(c, 6, 2), P1),
    ];
    for (name, close, p) in runs {
        let mut outputs = Vec::new();
        for _ in 0..3 {
            let c = listing();
            let net = close(&c).network;
            let v =
                model_check(&net, &prop(p), Engine::Ndfs, 1_000_000).map_err(|e| e.to_string())?;
            outputs.push(v.to_json(&net, false));
        }
        ensure(outputs.iter().all(|o| *o == outputs[0]), || {
            format!("verdict {name} JSON differs between runs")
        })?;
    }
    Ok("listing round-trips; verdict JSON identical over 3 runs of A, B, C".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "abstract functional layer violates F G !(goto @ Running)",
            verdict_a,
        ),
        (
            "abstract functional layer satisfies the battery property",
            verdict_b,
        ),
        (
            "refined functional layer satisfies F G !(goto @ Running)",
            verdict_c,
        ),
        ("goto is executable", executability),
        ("semantics oracle", semantics_oracle),
        ("engine cross-validation", cross_validation),
        ("automaton translation", translation),
        ("bounded refinement", refinement),
        ("round-trip and determinism", round_trip_and_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{elapsed:.1?}]", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name}: {reason} [{elapsed:.1?}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
