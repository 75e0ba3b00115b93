//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use skillcheck::compile::{compile, CompiledSkillset};
use skillcheck::ltl::{
    eval_word, model_check, Atom, Engine, LassoWord, LtlFormula, Valuation, Verdict,
};
use skillcheck::lts::{Event, GlobalState, Lts, Network, STUTTER};
use skillcheck::skill_lang::{parse_skillset, CUSTOM_ROBOT};
use skillcheck::system::{builtin_attachment, ClosedSystem, SystemBuilder};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A random network: up to `max_comps` components, each with up to
/// `max_states` states, over at most `max_events` event names.
pub fn random_components(
    rng: &mut ChaCha8Rng,
    max_comps: usize,
    max_states: usize,
    max_events: usize,
) -> Vec<Lts> {
    let n_events = rng.gen_range(1..=max_events);
    let events: Vec<String> = (0..n_events).map(|i| format!("e{i}")).collect();
    let n_comps = rng.gen_range(1..=max_comps);
    (0..n_comps)
        .map(|c| {
            let n_states = rng.gen_range(1..=max_states);
            let states: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();
            let mut b = Lts::builder(&format!("c{c}"));
            b.initial(&states[0]);
            for s in &states {
                b.state(s);
            }
            for e in &events {
                if !rng.gen_bool(0.6) {
                    continue;
                }
                b.event(e);
                for s in &states {
                    let k = rng.gen_range(0..=2);
                    for _ in 0..k {
                        let t = states.choose(rng).unwrap();
                        b.transition(s, e, t);
                    }
                }
            }
            b.build().unwrap()
        })
        .collect()
}

/// The synchronized product by its definition: `g'` is an `a`-successor of
/// `g` iff every component knowing `a` moves by an `a`-transition and every
/// other component keeps its state. Candidates range over the full
/// Cartesian product of local states.
pub struct BruteForce<'a> {
    pub comps: &'a [Lts],
    pub stutter: bool,
}

impl BruteForce<'_> {
    pub fn all_states(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for c in self.comps {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..c.states().len() as u32).map(move |q| {
                        let mut p = p.clone();
                        p.push(q);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn events(&self) -> BTreeSet<String> {
        self.comps
            .iter()
            .flat_map(|c| c.alphabet().iter().map(|e| e.name().to_string()))
            .collect()
    }

    fn step_ok(&self, g: &[u32], a: &str, h: &[u32]) -> bool {
        self.comps.iter().enumerate().all(|(i, c)| {
            if c.alphabet().iter().any(|e| e.name() == a) {
                c.transitions().iter().any(|t| {
                    t.source == g[i] as usize && t.event.name() == a && t.target == h[i] as usize
                })
            } else {
                g[i] == h[i]
            }
        })
    }

    pub fn successors(&self, g: &[u32], a: &str) -> BTreeSet<Vec<u32>> {
        if a == STUTTER {
            let stuck = self
                .events()
                .iter()
                .all(|e| self.successors(g, e).is_empty());
            return if self.stutter && stuck {
                [g.to_vec()].into()
            } else {
                BTreeSet::new()
            };
        }
        self.all_states()
            .into_iter()
            .filter(|h| self.step_ok(g, a, h))
            .collect()
    }

    pub fn enabled(&self, g: &[u32]) -> Vec<String> {
        let mut out: Vec<String> = self
            .events()
            .into_iter()
            .filter(|e| !self.successors(g, e).is_empty())
            .collect();
        if self.stutter && out.is_empty() {
            out.push(STUTTER.to_string());
        }
        out
    }

    pub fn label(&self, g: &[u32]) -> String {
        let parts: Vec<&str> = self
            .comps
            .iter()
            .zip(g)
            .map(|(c, &q)| c.states()[q as usize].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    /// Reachable states and labeled transitions, by state label.
    pub fn product(&self) -> (BTreeSet<String>, BTreeSet<(String, String, String)>) {
        let init: Vec<u32> = self.comps.iter().map(|c| c.initial() as u32).collect();
        let mut seen = HashSet::from([init.clone()]);
        let mut queue = VecDeque::from([init]);
        let mut trans = BTreeSet::new();
        while let Some(g) = queue.pop_front() {
            for a in self.enabled(&g) {
                for h in self.successors(&g, &a) {
                    trans.insert((self.label(&g), a.clone(), self.label(&h)));
                    if seen.insert(h.clone()) {
                        queue.push_back(h);
                    }
                }
            }
        }
        (seen.iter().map(|g| self.label(g)).collect(), trans)
    }
}

pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize, atoms: &[Atom]) -> LtlFormula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..10) {
            0 => LtlFormula::True,
            1 => LtlFormula::False,
            _ => LtlFormula::Atom(atoms.choose(rng).unwrap().clone()),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, depth - 1, atoms);
    match rng.gen_range(0..9) {
        0 => sub(rng).not(),
        1 => sub(rng).next(),
        2 => sub(rng).eventually(),
        3 => sub(rng).always(),
        4 => sub(rng).and(sub(rng)),
        5 => sub(rng).or(sub(rng)),
        6 => sub(rng).implies(sub(rng)),
        7 => sub(rng).until(sub(rng)),
        _ => sub(rng).release(sub(rng)),
    }
}

pub fn letter_atoms() -> Vec<Atom> {
    ["p", "q", "r"].iter().map(|s| Atom::new("c", s)).collect()
}

/// A fixed list of formulas of depth at most 4: every formula of depth at
/// most 1 over `p` and `q`, the standard patterns, then seeded random ones
/// until `total` formulas are listed. At most `three_atom` of them use all
/// of `p`, `q` and `r`.
pub fn formula_enumeration(total: usize, three_atom: usize) -> Vec<LtlFormula> {
    let atoms = letter_atoms();
    let (p, q, r) = (
        LtlFormula::Atom(atoms[0].clone()),
        LtlFormula::Atom(atoms[1].clone()),
        LtlFormula::Atom(atoms[2].clone()),
    );
    let mut out = vec![
        LtlFormula::True,
        LtlFormula::False,
        p.clone(),
        q.clone(),
        r.clone(),
    ];
    for a in [&p, &q] {
        out.push(a.clone().not());
        out.push(a.clone().next());
        out.push(a.clone().eventually());
        out.push(a.clone().always());
    }
    for (a, b) in [(&p, &q), (&q, &p), (&p, &p)] {
        out.push(a.clone().and(b.clone()));
        out.push(a.clone().or(b.clone()));
        out.push(a.clone().implies(b.clone()));
        out.push(a.clone().until(b.clone()));
        out.push(a.clone().release(b.clone()));
    }
    out.push(p.clone().eventually().always());
    out.push(p.clone().always().eventually());
    out.push(
        q.clone()
            .always()
            .eventually()
            .implies(p.clone().not().always().eventually()),
    );
    out.push(
        q.clone()
            .always()
            .eventually()
            .and(p.clone().eventually().always()),
    );
    out.push(p.clone().implies(q.clone().eventually()).always());
    out.push(p.clone().until(q.clone().until(r.clone())));

    let mut rng = rng(0x5eed_b0c1);
    let mut seen: BTreeSet<LtlFormula> = out.iter().cloned().collect();
    let mut wide = out.iter().filter(|f| f.atoms().len() == 3).count();
    while out.len() < total {
        let depth = rng.gen_range(2..=4);
        let f = random_formula(&mut rng, depth, &atoms);
        if f.depth() > 4 || !seen.insert(f.clone()) {
            continue;
        }
        if f.atoms().len() == 3 {
            if wide >= three_atom {
                continue;
            }
            wide += 1;
        }
        out.push(f);
    }
    out
}

/// Calls `visit` on every lasso word over the given atoms with
/// `prefix + cycle <= max_len`: each letter sequence once per split into a
/// prefix and a non-empty cycle. Returns the number of words.
pub fn for_each_lasso_word(
    atoms: &[Atom],
    max_len: usize,
    mut visit: impl FnMut(&LassoWord),
) -> usize {
    let letters: Vec<Valuation> = (0..1u32 << atoms.len())
        .map(|bits| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect();
    let mut count = 0;
    for len in 1..=max_len {
        let mut seq = vec![0usize; len];
        loop {
            for split in 0..len {
                let word = LassoWord {
                    prefix: seq[..split].iter().map(|&l| letters[l].clone()).collect(),
                    cycle: seq[split..].iter().map(|&l| letters[l].clone()).collect(),
                };
                visit(&word);
                count += 1;
            }
            let mut k = len;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                seq[k] += 1;
                if seq[k] < letters.len() {
                    break;
                }
                seq[k] = 0;
            }
            if seq.iter().all(|&l| l == 0) {
                break;
            }
        }
    }
    count
}

/// Checks the automaton of `f` against direct evaluation on every lasso
/// word over the atoms of `f`. Returns the number of words checked.
pub fn translation_agrees(f: &LtlFormula, max_len: usize) -> Result<usize, String> {
    let atoms: Vec<Atom> = f.atoms().into_iter().cloned().collect();
    let b = skillcheck::ltl::ltl_to_buchi(f);
    let mut bad = None;
    let n = for_each_lasso_word(&atoms, max_len, |w| {
        if bad.is_none() && b.accepts_lasso(w) != eval_word(f, w) {
            bad = Some(format!("{f} on {w:?}"));
        }
    });
    bad.map_or(Ok(n), Err)
}

pub const P1: &str = "F G !(goto @ Running)";
pub const P2: &str = "F G (battery @ Critical) -> F G !(goto @ Running)";
pub const EXECUTABLE: &str = "G !(goto @ Running)";

pub fn listing() -> CompiledSkillset {
    compile(&parse_skillset(CUSTOM_ROBOT).unwrap()).unwrap()
}

pub fn abstract_system(c: &CompiledSkillset) -> ClosedSystem {
    SystemBuilder::new(c).auto_abstract(true).build().unwrap()
}

pub fn refined_system(c: &CompiledSkillset, bmax: i64, dmax: i64) -> ClosedSystem {
    let spec = format!("refined-goto:Bmax={bmax},Dmax={dmax}");
    SystemBuilder::new(c)
        .attach(builtin_attachment(&spec, c).unwrap())
        .auto_abstract(true)
        .build()
        .unwrap()
}

/// Runs both engines, requires them to agree and validates every lasso.
pub fn check_both(net: &Network, f: &LtlFormula) -> Result<Verdict, String> {
    let a = model_check(net, f, Engine::Ndfs, 1_000_000).map_err(|e| e.to_string())?;
    let b = model_check(net, f, Engine::Scc, 1_000_000).map_err(|e| e.to_string())?;
    if a.holds() != b.holds() {
        return Err(format!(
            "engines disagree on {f}: ndfs {}, scc {}",
            a.holds(),
            b.holds()
        ));
    }
    for v in [&a, &b] {
        if let Some(l) = v.lasso() {
            l.validate(net, f).map_err(|e| format!("{f}: {e}"))?;
        }
    }
    Ok(a)
}

/// Compares a network against [`BruteForce`] on every state of the
/// Cartesian product and on the materialized reachable product.
pub fn compare_semantics(comps: Vec<Lts>, stutter: bool) -> Result<(), String> {
    let mut net = Network::new(comps.clone()).map_err(|e| e.to_string())?;
    if stutter {
        net = net.stutter_close();
    }
    let brute = BruteForce {
        comps: &comps,
        stutter,
    };
    let mut events: Vec<String> = brute.events().into_iter().collect();
    if stutter {
        events.push(STUTTER.to_string());
    }
    for g in brute.all_states() {
        let gs = GlobalState::new(g.clone());
        for a in &events {
            let got: BTreeSet<Vec<u32>> = net
                .successors(&gs, &Event::new(a))
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|h| h.locals().to_vec())
                .collect();
            if got != brute.successors(&g, a) {
                return Err(format!("successors of {} under {a}", brute.label(&g)));
            }
        }
        let enabled: Vec<String> = net
            .enabled_events(&gs)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|e| e.name().to_string())
            .collect();
        if enabled != brute.enabled(&g) {
            return Err(format!("enabled events at {}", brute.label(&g)));
        }
    }
    let product = net.product_explicit(1_000_000).map_err(|e| e.to_string())?;
    let states: BTreeSet<String> = product.states().iter().cloned().collect();
    let trans: BTreeSet<(String, String, String)> = product
        .transitions()
        .iter()
        .map(|t| {
            (
                product.states()[t.source].clone(),
                t.event.name().to_string(),
                product.states()[t.target].clone(),
            )
        })
        .collect();
    let (want_states, want_trans) = brute.product();
    if states != want_states {
        return Err("reachable states differ".into());
    }
    if trans != want_trans {
        return Err("reachable transitions differ".into());
    }
    if product.states()[product.initial()] != brute.label(&brute_initial(&comps)) {
        return Err("initial state differs".into());
    }
    Ok(())
}

fn brute_initial(comps: &[Lts]) -> Vec<u32> {
    comps.iter().map(|c| c.initial() as u32).collect()
}

/// Searches the state graph for a lasso with `prefix + cycle <= max_len`
/// violating `f`, visiting at most `max_paths` paths. Returns the number of
/// paths visited, or the violating word.
pub fn bounded_violation(
    net: &Network,
    f: &LtlFormula,
    max_len: usize,
    max_paths: usize,
) -> Result<usize, LassoWord> {
    let not_f = f.clone().not();
    let atoms: Vec<(Atom, usize, u32)> = f
        .atoms()
        .into_iter()
        .map(|a| {
            let c = net.component_index(&a.component).unwrap();
            let q = net.components()[c].state_index(&a.state).unwrap() as u32;
            (a.clone(), c, q)
        })
        .collect();
    let label = |g: &GlobalState| -> Valuation {
        atoms
            .iter()
            .filter(|(_, c, q)| g.local(*c) == *q)
            .map(|(a, _, _)| a.clone())
            .collect()
    };
    let mut succ_cache: HashMap<GlobalState, Vec<GlobalState>> = HashMap::new();
    let mut succ = |g: &GlobalState| -> Vec<GlobalState> {
        succ_cache
            .entry(g.clone())
            .or_insert_with(|| {
                let mut v: Vec<GlobalState> = net.steps(g).into_iter().map(|(_, h)| h).collect();
                v.sort();
                v.dedup();
                v
            })
            .clone()
    };
    let mut visited = 0usize;
    let mut stack: Vec<Vec<GlobalState>> = vec![vec![net.initial_state()]];
    while let Some(path) = stack.pop() {
        visited += 1;
        if visited > max_paths {
            break;
        }
        let last = path.last().unwrap();
        let next = succ(last);
        for (j, g) in path.iter().enumerate() {
            if next.contains(g) {
                let word = LassoWord {
                    prefix: path[..j].iter().map(&label).collect(),
                    cycle: path[j..].iter().map(&label).collect(),
                };
                if eval_word(&not_f, &word) {
                    return Err(word);
                }
            }
        }
        if path.len() < max_len {
            for h in next {
                let mut p = path.clone();
                p.push(h);
                stack.push(p);
            }
        }
    }
    Ok(visited)
}

/// One engine-agreement trial: a random stutter-closed network and a random
/// formula of depth at most 4 over up to three of its local states. Both
/// engines must agree, lassos must validate, and when the property holds no
/// short lasso may violate it. Returns the verdict.
pub fn engine_trial(rng: &mut ChaCha8Rng) -> Result<bool, String> {
    let comps = random_components(rng, 3, 5, 6);
    let net = Network::new(comps)
        .map_err(|e| e.to_string())?
        .stutter_close();
    let mut pool: Vec<Atom> = net
        .components()
        .iter()
        .flat_map(|c| c.states().iter().map(|s| Atom::new(c.name(), s)))
        .collect();
    pool.shuffle(rng);
    pool.truncate(rng.gen_range(1..=3));
    let depth = rng.gen_range(1..=4);
    let f = random_formula(rng, depth, &pool);
    let v = check_both(&net, &f)?;
    if v.holds() {
        if let Err(word) = bounded_violation(&net, &f, 6, 20_000) {
            return Err(format!("{f} reported to hold, but {word:?} violates it"));
        }
    }
    Ok(v.holds())
}

/// Bounded trace inclusion: every run of `concrete` with at most `depth`
/// visible events, after erasing `hidden`, must be a run of `abstract_`.
/// Returns the number of (concrete state, abstract set) pairs visited, or a
/// visible trace the abstract network cannot follow.
pub fn trace_inclusion(
    concrete: &Network,
    abstract_: &Network,
    hidden: &BTreeSet<Event>,
    depth: usize,
) -> Result<usize, Vec<String>> {
    type Node = (GlobalState, BTreeSet<GlobalState>);
    let start: Node = (
        concrete.initial_state(),
        BTreeSet::from([abstract_.initial_state()]),
    );
    let mut best: HashMap<Node, usize> = HashMap::from([(start.clone(), 0)]);
    let mut parent: HashMap<Node, (Node, String)> = HashMap::new();
    let mut queue = VecDeque::from([(start, 0usize)]);
    let trace = |parent: &HashMap<Node, (Node, String)>, mut n: Node, last: String| {
        let mut out = vec![last];
        while let Some((p, e)) = parent.get(&n) {
            out.push(e.clone());
            n = p.clone();
        }
        out.reverse();
        out
    };
    while let Some((node, d)) = queue.pop_front() {
        if best.get(&node).is_some_and(|&b| b < d) {
            continue;
        }
        let (g, set) = &node;
        for (id, h) in concrete.steps(g) {
            let event = concrete.event(id);
            let (next, nd) = if hidden.contains(event) {
                ((h, set.clone()), d)
            } else {
                if d == depth {
                    continue;
                }
                let mut image = BTreeSet::new();
                if abstract_.event_id(event.name()).is_some() {
                    for s in set {
                        image.extend(abstract_.successors(s, event).unwrap());
                    }
                }
                if image.is_empty() {
                    return Err(trace(&parent, node.clone(), event.name().to_string()));
                }
                ((h, image), d + 1)
            };
            if best.get(&next).is_none_or(|&b| nd < b) {
                best.insert(next.clone(), nd);
                parent.insert(next.clone(), (node.clone(), event.name().to_string()));
                if nd == d {
                    queue.push_front((next, nd));
                } else {
                    queue.push_back((next, nd));
                }
            }
        }
    }
    Ok(best.len())
}
