//! Short coupled run on a coarse mesh: disk falling toward the wall.
//!
//! Generates the disk-in-box mesh, seeds the fluid with the startup Stokes
//! solve, and advances a handful of steps, printing the interface bottom
//! height, the displaced-mesh quality, and Newton iteration counts.
//!
//!     cargo run --release --example fsi_rebound_smoke

use rebound_fsi::ale::{
    advance, initial_conditions, AleState, GlowinskiSettings, RemeshPolicy, Stepper,
};
use rebound_fsi::fem::NewtonSettings;
use rebound_fsi::material::{MaterialParams, PseudoSolidParams};
use rebound_fsi::mesh::generate_initial_mesh;

fn interface_bottom(state: &AleState) -> f64 {
    let spaces = state.spaces();
    state
        .mesh
        .interface_vertices()
        .iter()
        .map(|&vi| {
            let n = spaces.p2v.vertex_node(vi).unwrap();
            state.mesh.vertices[vi][1] + state.u_c[spaces.p2v.dof(n, 1)]
        })
        .fold(f64::INFINITY, f64::min)
}

fn main() {
    let mesh = generate_initial_mesh(0, 48).expect("mesh generation");
    println!(
        "mesh: {} vertices, {} cells, quality {:.3}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.quality()
    );

    let params = MaterialParams::default();
    let mut state = initial_conditions(mesh, &params, [0.0, -0.5]).expect("startup solve");
    println!("startup: interface bottom at y = {:.6}", interface_bottom(&state));

    let glow = GlowinskiSettings { dt: 4e-4, t_end: 0.0, ..GlowinskiSettings::default() };
    let mut stepper =
        Stepper::new(params, PseudoSolidParams::default(), glow, NewtonSettings::default());
    let policy = RemeshPolicy::for_mesh(&state.mesh);

    let mut step = 0usize;
    advance(&mut state, &mut stepper, &policy, 25, |s, rm, rep| {
        step += 1;
        if step % 5 == 0 || rm.remeshed {
            println!(
                "t = {:.4}  y_bot = {:.6}  probe q = {:.3}  newton {}+{}  gen {}{}",
                s.t,
                interface_bottom(s),
                rm.probe_quality,
                rep.first.iterations,
                rep.second.iterations,
                s.mesh.generation,
                if rm.remeshed { "  [re-meshed]" } else { "" },
            );
        }
        assert!(interface_bottom(s) > 0.0, "disk touched the wall");
    })
    .expect("time stepping");

    println!("done: t = {:.4}, {} steps", state.t, step);
}
