mod common;

use common::{abstract_system, check_both, listing, refined_system, EXECUTABLE, P1, P2};
use skillcheck::compile::{compile_with, Autonomy, CompileOptions};
use skillcheck::ltl::{parse_ltl, Verdict};
use skillcheck::lts::Network;
use skillcheck::skill_lang::{parse_skillset, CUSTOM_ROBOT};

fn check(net: &Network, prop: &str) -> Verdict {
    check_both(net, &parse_ltl(prop).unwrap()).unwrap()
}

fn running_in_cycle(net: &Network, v: &Verdict) -> bool {
    let goto = net.component_index("goto").unwrap();
    let running = net.components()[goto].state_index("Running").unwrap() as u32;
    v.lasso()
        .unwrap()
        .cycle
        .iter()
        .any(|s| s.state.local(goto) == running)
}

#[test]
fn abstract_functional_layer_violates_property_one() {
    let c = listing();
    let net = abstract_system(&c).network;
    let v = check(&net, P1);
    assert!(!v.holds());
    assert!(running_in_cycle(&net, &v));
    assert!(v.states_explored < 100_000);
}

#[test]
fn abstract_functional_layer_satisfies_property_two() {
    let c = listing();
    assert!(check(&abstract_system(&c).network, P2).holds());
}

#[test]
fn refined_functional_layer_satisfies_property_one() {
    let c = listing();
    assert!(check(&refined_system(&c, 6, 2).network, P1).holds());
    assert!(check(&refined_system(&c, 2, 1).network, P1).holds());
}

#[test]
fn free_motion_breaks_property_two() {
    let ast = parse_skillset(CUSTOM_ROBOT).unwrap();
    let c = compile_with(
        &ast,
        CompileOptions {
            autonomy: Autonomy::Always,
        },
    )
    .unwrap();
    assert!(!check(&abstract_system(&c).network, P2).holds());
}

#[test]
fn goto_is_executable() {
    let c = listing();
    let net = abstract_system(&c).network;
    let v = check(&net, EXECUTABLE);
    assert!(!v.holds());
}
