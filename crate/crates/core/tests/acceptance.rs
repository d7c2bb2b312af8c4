//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;

use pa_core::algebra::{initial_distance, parallel};
use pa_core::bench::{basic_grid, heatmap, ring, GridMetric, GridSpec};
use pa_core::fixtures::{self, state};
use pa_core::format::read_automaton;
use pa_core::lifting::{build_network, extract_weight_function, lift_check, lift_check_bruteforce, max_flow, SUBSET_CAP};
use pa_core::logic::{parse_formula, relax_formula, sat_set, FormulaSampler};
use pa_core::metrics::{distance_approx, distance_discounted, distance_exact};
use pa_core::random::{rng, subdistribution, RandomPa};
use pa_core::simulation::{apriori_simulation, classical_bisim_oracle, classical_sim_oracle, epsilon_bisimulation, epsilon_simulation};
use pa_core::{disjoint_union, r, Action, Error, ProbAutomaton, Rational, Relation, StateId, SubDistribution, Transition};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn load(name: &str) -> ProbAutomaton {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    let pa = read_automaton(&std::fs::read_to_string(&p).unwrap()).unwrap();
    pa.ensure_valid().unwrap();
    pa
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pa = load("fig1.json");
    let (s, t) = (state(&pa, "s"), state(&pa, "t"));
    let eps = r!(1, 8);
    let sim = epsilon_simulation(&pa, &eps).unwrap();
    ensure(sim.contains(s, t) && sim.contains(t, s), "s and t should simulate each other at 1/8")?;
    let below = epsilon_simulation(&pa, &(eps.clone() - r!(1, 1000))).unwrap();
    ensure(!below.contains(s, t) && !below.contains(t, s), "neither direction should hold below 1/8")?;
    ensure(!epsilon_bisimulation(&pa, &eps).unwrap().contains(s, t), "s and t should not be 1/8-bisimilar")?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), format!("took {took:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn criterion_2() -> Outcome {
    let pa = load("prio_not_post.json");
    let (s, t) = (state(&pa, "s"), state(&pa, "t"));
    ensure(apriori_simulation(&pa, &r!(0)).unwrap().contains(s, t), "a-priori simulation misses (s,t)")?;
    ensure(!epsilon_simulation(&pa, &r!(0)).unwrap().contains(s, t), "simulation contains (s,t)")?;
    Ok(String::new())
}

fn criterion_3() -> Outcome {
    let pa = load("prio_not_post.json");
    let phi = parse_formula("<a>{(<b1 1> T, 1/3), (<b2 1> T, 1/4), (<b3 1> T, 5/12)}").unwrap();
    let sat = sat_set(&pa, &phi, &r!(0));
    ensure(sat[state(&pa, "s").0], "s should satisfy the formula")?;
    ensure(!sat[state(&pa, "t").0], "t should not satisfy the formula")?;
    Ok(String::new())
}

fn criterion_4() -> Outcome {
    let left = load("fig3_left.json");
    let right = load("fig3_right.json");
    let dl = distance_exact(&left).unwrap();
    let dr = distance_exact(&right).unwrap();
    let st = dl.get(state(&left, "s"), state(&left, "t")).clone();
    let uv = dr.get(state(&right, "u"), state(&right, "v")).clone();
    ensure(st == r!(1, 4), format!("d(s,t) = {st}"))?;
    ensure(uv == r!(1, 4), format!("d(u,v) = {uv}"))?;
    Ok("d(s,t) = d(u,v) = 1/4".into())
}

fn random_relation<R: Rng>(rng: &mut R, n: usize) -> Relation {
    let density = rng.random_range(0.0..1.0);
    let mut rel = Relation::empty(n, n);
    for s in 0..n {
        for t in 0..n {
            if rng.random_bool(density) {
                rel.insert(StateId(s), StateId(t));
            }
        }
    }
    rel
}

fn criterion_5() -> Outcome {
    let mut g = rng(5);
    let mut holds = 0;
    for i in 0..500 {
        let n = g.random_range(1..=8);
        let mu = subdistribution(&mut g, n, n, 16, 0.5);
        let nu = subdistribution(&mut g, n, n, 16, 0.5);
        let rel = random_relation(&mut g, n);
        let eps = Rational::new(g.random_range(0..=16), 16);
        let flow = lift_check(&mu, &nu, &rel, &eps).unwrap();
        let brute = lift_check_bruteforce(&mu, &nu, &rel, &eps).unwrap();
        let net = build_network(&mu, &nu, &rel);
        let certified = extract_weight_function(&net, &max_flow(&net)).certifies(&mu, &nu, &rel, &eps);
        ensure(flow == brute && brute == certified, format!("instance {i}: flow {flow}, subsets {brute}, weights {certified}"))?;
        holds += flow as usize;
    }
    Ok(format!("500/500 agree, {holds} liftings"))
}

fn criterion_6() -> Outcome {
    let mut g = rng(6);
    let gen = RandomPa::default();
    for i in 0..200 {
        let pa = gen.generate(&mut g);
        let sim = epsilon_simulation(&pa, &r!(0)).unwrap().relation;
        ensure(sim == classical_sim_oracle(&pa).unwrap(), format!("automaton {i}: simulation differs from oracle"))?;
        let zero = distance_exact(&pa).unwrap().threshold(&r!(0));
        ensure(zero == classical_bisim_oracle(&pa).unwrap(), format!("automaton {i}: zero set differs from bisimilarity"))?;
    }
    Ok("200/200 agree".into())
}

fn criterion_7() -> Outcome {
    let mut g = rng(7);
    let gen = RandomPa::default();
    let bound = r!(1, 16);
    for i in 0..100 {
        let pa = gen.generate(&mut g);
        let exact = distance_exact(&pa).unwrap();
        let approx = distance_approx(&pa, 16).unwrap();
        for s in pa.states() {
            for t in pa.states() {
                let gap = (approx.get(s, t).clone() - exact.get(s, t).clone()).abs();
                ensure(gap <= bound, format!("automaton {i}: |{} - {}| > 1/16", approx.get(s, t), exact.get(s, t)))?;
            }
        }
    }
    Ok("100 automata within 1/16".into())
}

fn polarised(actions: &[(&str, bool)]) -> Vec<Action> {
    actions.iter().map(|&(a, input)| if input { Action::input(a) } else { Action::output(a) }).collect()
}

fn criterion_8() -> Outcome {
    let mut g = rng(8);
    let components = RandomPa::default().with_states(1, 4).with_actions(polarised(&[("a", true), ("b", false)]));
    let mut strict = 0;
    for i in 0..100 {
        let s1 = components.generate_named(&mut g, "p");
        let s2 = components.generate_named(&mut g, "q");
        let mut ctx_actions = polarised(&[("a", g.random_bool(0.5)), ("b", true)]);
        ctx_actions.push(Action::plain("c"));
        let ctx = RandomPa::default().with_states(1, 4).with_actions(ctx_actions).generate_named(&mut g, "r");
        let before = initial_distance(&s1, &s2).unwrap();
        let after = initial_distance(&parallel(&s1, &ctx).unwrap(), &parallel(&s2, &ctx).unwrap()).unwrap();
        ensure(after <= before, format!("triple {i}: composed {after} > components {before}"))?;
        strict += (after < before) as usize;
    }
    Ok(format!("100 triples, {strict} strict decreases"))
}

fn criterion_9() -> Outcome {
    // a hand-checked relaxation first
    let phi = parse_formula("<a 1/2> !<a 1/5> T").unwrap();
    let eps = r!(1, 10);
    ensure(relax_formula(&phi, &eps) == parse_formula("<a 2/5> !<a 3/10> T").unwrap(), "hand-checked relaxation")?;
    let mut single = RandomPa::default().with_actions(vec![Action::plain("a")]);
    single.max_states = 5;
    let mut g = rng(9);
    for _ in 0..5 {
        let pa = single.generate(&mut g);
        ensure(sat_set(&pa, &phi, &eps) == sat_set(&pa, &relax_formula(&phi, &eps), &r!(0)), "hand-checked formula")?;
    }

    let gen = RandomPa::default();
    let autos: Vec<ProbAutomaton> = (0..20).map(|_| gen.generate(&mut g)).collect();
    let mut sampler = FormulaSampler::new(9, vec!["a".into(), "b".into()]).negation(true);
    for k in 0..300 {
        let phi = sampler.sample();
        let pa = &autos[k % autos.len()];
        let eps = Rational::new(g.random_range(-16..=16), 16);
        let direct = sat_set(pa, &phi, &eps);
        let relaxed = sat_set(pa, &relax_formula(&phi, &eps), &r!(0));
        ensure(direct == relaxed, format!("formula {k}: {phi} at {eps}"))?;
    }
    Ok("300 formulas over 20 automata".into())
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let n = 5;
    for metric in [GridMetric::Exact, GridMetric::Discounted(20)] {
        let map = heatmap(&GridSpec::new(n).metric(metric)).unwrap();
        ensure(map.iter().flatten().all(Rational::is_zero), format!("{metric} heatmap without deletions is not zero"))?;
    }
    let grid = basic_grid(n).unwrap();
    let lp = fixtures::one_state_loop();
    let u = disjoint_union(&[&grid, &lp]).unwrap();
    let d = distance_exact(&u.automaton).unwrap();
    let p = u.embed(1, StateId(0));
    ensure(grid.states().all(|s| d.get(u.embed(0, s), p).is_zero()), "grid not at distance 0 from the loop")?;

    let deleted = (2, 2);
    let map = heatmap(&GridSpec::new(n).delete(deleted.0, deleted.1).metric(GridMetric::Discounted(20))).unwrap();
    ensure(map[deleted.0][deleted.1] == r!(1), "deleted cell should be at distance 1")?;
    let mut ring_max = vec![Rational::zero(); 3];
    for i in 0..n {
        for j in 0..n {
            let k = ring(n, deleted, (i, j));
            if k > 0 {
                ensure(map[i][j] < r!(1), format!("cell ({i},{j}) at distance {}", map[i][j]))?;
            }
            if k < ring_max.len() {
                ring_max[k] = ring_max[k].clone().max(map[i][j].clone());
            }
        }
    }
    ensure(ring_max.windows(2).all(|w| w[1] <= w[0]), format!("ring maxima {ring_max:?} increase"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), format!("took {took:?}"))?;
    let maxima: Vec<String> = ring_max.iter().map(ToString::to_string).collect();
    Ok(format!("ring maxima {}, {took:.2?}", maxima.join(" >= ")))
}

fn criterion_11() -> Outcome {
    let mut g = rng(11);
    let gen = RandomPa::default();
    for i in 0..100 {
        let pa = gen.generate(&mut g);
        let size = pa.num_states();
        let exact = distance_exact(&pa).unwrap();
        ensure(exact.iterations <= size * size + 1, format!("automaton {i}: {} rounds for {size} states", exact.iterations))?;
        let disc = distance_discounted(&pa, 12).unwrap();
        ensure(disc.iterations <= 12, format!("automaton {i}: {} discounted rounds", disc.iterations))?;
    }
    // the a-priori decider refuses supports beyond its cap
    let wide = SUBSET_CAP + 1;
    let names: Vec<String> = (0..wide).map(|i| format!("x{i}")).collect();
    let target = SubDistribution::new((0..wide).map(|i| (StateId(i), Rational::new(1, wide as i64)))).unwrap();
    let pa = ProbAutomaton::new(
        names,
        vec![Action::plain("a")],
        vec![Transition { source: StateId(0), action: "a".into(), target }],
        None,
    );
    ensure(matches!(apriori_simulation(&pa, &r!(0)), Err(Error::SizeCap { .. })), "size cap not enforced")?;
    Ok("round counts within |S|^2 + 1 and N; support cap enforced".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("fig1 approximate simulation", criterion_1),
        ("a-priori strictly coarser", criterion_2),
        ("set-diamond separation", criterion_3),
        ("fig3 distances", criterion_4),
        ("lifting characterisations agree", criterion_5),
        ("zero-slack oracles", criterion_6),
        ("approximation within 1/n", criterion_7),
        ("non-expansiveness", criterion_8),
        ("relaxed semantics by rewriting", criterion_9),
        ("torus grid", criterion_10),
        ("complexity surrogates", criterion_11),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(note) if note.is_empty() => println!("PASS {:>2} {name}", i + 1),
            Ok(note) => println!("PASS {:>2} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
