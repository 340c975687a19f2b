"""Gradient-flow orchestration: one step couples four linear solves with a
bound-constrained phase update, all coefficients frozen at the previous
phase field.

Per step, in order: the programming-stage displacement, the programmed-stage
displacement driven by the retained eigenstrains, the two adjoint solves in
backward coupling order, and finally the semi-implicit obstacle VI for the
new phase field.  The cost is the weighted boundary mismatch plus the
gamma-scaled Ginzburg-Landau energy.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import targets as targets_mod
from .assembly import Assembler, ConfigurationError
from .material import Stage, default_material, potential
from .mesh import build_box_mesh
from .solver import TimeStepError, solve_obstacle_vi, solve_spd

__all__ = [
    "RunConfig",
    "TraceRow",
    "EnergyTrace",
    "CostBreakdown",
    "OptState",
    "RunResult",
    "PipelineError",
    "Pipeline",
    "run",
]


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one experiment."""

    extents: tuple
    resolution: tuple
    boundary: object
    target: object
    epsilon: float
    gamma: float
    tau: float
    material: object = field(default_factory=default_material)
    body_force_stage1: tuple = None
    body_force_stage2: tuple = None
    tractions_stage1: dict = field(default_factory=dict)
    tractions_stage2: dict = field(default_factory=dict)
    max_steps: int = 200
    seed: int = 0
    init_kind: str = "random"
    init_amplitude: float = 0.1
    init_value: float = 0.0
    cg_tol: float = 1e-9
    cg_max_iter: int = 50000
    vi_tol: float = 1e-9
    vi_max_sweeps: int = 10000
    stop_rtol: float = 1e-12
    stop_patience: int = 20
    snapshot_every: int = 0

    @property
    def dim(self):
        return len(self.extents)

    def validate(self):
        if self.epsilon <= 0.0:
            raise ConfigurationError("epsilon must be positive")
        if self.gamma <= 0.0:
            raise ConfigurationError("gamma must be positive")
        bound = self.epsilon ** 2 / self.gamma
        if not 0.0 < self.tau < bound:
            raise TimeStepError(
                f"tau = {self.tau} outside (0, eps^2/gamma = {bound})")
        if len(self.resolution) != self.dim:
            raise ConfigurationError("resolution and extents dimensions differ")
        if self.target.dim != self.dim:
            raise ConfigurationError("target dimension does not match the mesh")
        if self.init_kind not in ("random", "constant"):
            raise ConfigurationError(f"unknown init kind {self.init_kind!r}")
        if self.max_steps < 0 or self.snapshot_every < 0:
            raise ConfigurationError("step counts must be nonnegative")
        h_max = max((hi - lo) / n for (lo, hi), n in zip(self.extents, self.resolution))
        if h_max > self.epsilon:
            warnings.warn(
                f"mesh size h = {h_max:.4g} exceeds epsilon = {self.epsilon:.4g}; "
                "the diffuse interface (width pi*eps) is under-resolved",
                RuntimeWarning, stacklevel=2)
        return self

    def body_force(self, stage):
        f = (self.body_force_stage1 if stage is Stage.PROGRAMMING
             else self.body_force_stage2)
        return np.zeros(self.dim) if f is None else np.asarray(f, dtype=float)

    def tractions(self, stage):
        t = (self.tractions_stage1 if stage is Stage.PROGRAMMING
             else self.tractions_stage2)
        return {tag: np.asarray(g, dtype=float) for tag, g in t.items()}


@dataclass(frozen=True)
class TraceRow:
    step: int
    time: float
    cost: float
    target_energy: float
    interface_energy: float  # gamma-scaled Ginzburg-Landau energy
    vi_iterations: int
    cg_iterations: int


@dataclass
class EnergyTrace:
    rows: list = field(default_factory=list)

    def append(self, row):
        if self.rows and row.step <= self.rows[-1].step:
            raise ValueError("trace steps must increase strictly")
        if min(row.cost, row.target_energy, row.interface_energy) < 0.0:
            raise ValueError("energies must be nonnegative")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class CostBreakdown:
    total: float
    target: float
    interface: float  # gamma-scaled


@dataclass
class OptState:
    """Phase field after `step` updates plus the fields computed during the
    step (solved with coefficients at the previous phase field)."""

    step: int
    phi: np.ndarray
    u_bar: np.ndarray
    u_hat: np.ndarray
    q_hat: np.ndarray = None
    p_bar: np.ndarray = None
    cost: CostBreakdown = None
    vi_iterations: int = 0
    cg_iterations: int = 0


@dataclass
class RunResult:
    trace: EnergyTrace
    snapshots: list  # (step, phi, u_bar, u_hat)
    final_state: OptState


class PipelineError(RuntimeError):
    """A step failed; `partial` holds the trace/snapshots gathered so far."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class Pipeline:
    def __init__(self, config):
        self.config = config.validate()
        self.mesh = build_box_mesh(config.extents, config.resolution)
        self.assembler = Assembler(self.mesh, config.material, config.boundary)
        self.laplacian = self.assembler.scalar_laplacian()
        self.mass = self.assembler.lumped_mass_diagonal()
        self.weight = config.target.weight_matrix()
        length = config.extents[0][1] - config.extents[0][0]
        self.u_target = targets_mod.eval_target_nodal(
            config.target, self.mesh.vertices, length).ravel()
        self.load_stage1 = self.assembler.body_and_traction(
            Stage.PROGRAMMING, config.body_force(Stage.PROGRAMMING),
            config.tractions(Stage.PROGRAMMING))
        self.load_stage2 = self.assembler.body_and_traction(
            Stage.PROGRAMMED, config.body_force(Stage.PROGRAMMED),
            config.tractions(Stage.PROGRAMMED))

    # -- single solves ------------------------------------------------------

    def _solve(self, system, rhs, x0=None):
        return solve_spd(system, rhs, tol=self.config.cg_tol,
                         max_iter=self.config.cg_max_iter, x0=x0)

    def solve_stage1(self, phi, x0=None):
        system = self.assembler.stiffness(Stage.PROGRAMMING, phi)
        return self._solve(system, self.load_stage1, x0)

    def solve_stage2(self, phi, u_bar, x0=None):
        system = self.assembler.stiffness(Stage.PROGRAMMED, phi)
        rhs = self.load_stage2 + self.assembler.eigenstrain_rhs(phi, u_bar)
        return self._solve(system, rhs, x0)

    def solve_adjoint_q(self, phi, u_hat, x0=None):
        system = self.assembler.stiffness(Stage.PROGRAMMED, phi)
        rhs = self.assembler.target_rhs(u_hat, self.weight, self.u_target)
        return self._solve(system, rhs, x0)

    def solve_adjoint_p(self, phi, q_hat, x0=None):
        system = self.assembler.stiffness(Stage.PROGRAMMING, phi)
        rhs = self.assembler.eigenstrain_rhs(phi, q_hat)
        return self._solve(system, rhs, x0)

    # -- energies -----------------------------------------------------------

    def interface_energy(self, phi):
        """Ginzburg-Landau energy (eps/2)|grad phi|^2 + psi(phi)/eps, with the
        gradient term exact per cell and the potential mass-lumped."""
        eps = self.config.epsilon
        grad_term = 0.5 * eps * float(phi @ (self.laplacian @ phi))
        pot_term = float(self.mass @ potential(phi)) / eps
        return grad_term + pot_term

    def evaluate_cost(self, phi, u_hat):
        target = self.assembler.target_energy(u_hat, self.weight, self.u_target)
        interface = self.config.gamma * self.interface_energy(phi)
        return CostBreakdown(total=target + interface, target=target,
                             interface=interface)

    # -- the flow -----------------------------------------------------------

    def vi_system(self, phi, u_bar, u_hat, q_hat, p_bar):
        """Matrix and right-hand side of the phase-update VI at phi^{n-1}."""
        cfg = self.config
        w = self.assembler.vi_source(phi, u_bar, u_hat, q_hat, p_bar)
        coeff = cfg.epsilon / cfg.tau - cfg.gamma / cfg.epsilon
        matrix = ((cfg.gamma * cfg.epsilon) * self.laplacian
                  + sp.diags(coeff * self.mass)).tocsr()
        rhs = (cfg.epsilon / cfg.tau) * self.mass * phi - w
        return matrix, rhs

    def gradient_flow_step(self, state):
        """Advance one pseudo-time step from state.phi; warm-starts the
        linear solves with the previous step's fields."""
        cfg = self.config
        phi = state.phi
        sys1 = self.assembler.stiffness(Stage.PROGRAMMING, phi)
        sys2 = self.assembler.stiffness(Stage.PROGRAMMED, phi)

        u_bar, rep1 = self._solve(sys1, self.load_stage1, state.u_bar)
        rhs2 = self.load_stage2 + self.assembler.eigenstrain_rhs(phi, u_bar)
        u_hat, rep2 = self._solve(sys2, rhs2, state.u_hat)
        rhs_q = self.assembler.target_rhs(u_hat, self.weight, self.u_target)
        q_hat, rep3 = self._solve(sys2, rhs_q, state.q_hat)
        rhs_p = self.assembler.eigenstrain_rhs(phi, q_hat)
        p_bar, rep4 = self._solve(sys1, rhs_p, state.p_bar)

        w = self.assembler.vi_source(phi, u_bar, u_hat, q_hat, p_bar)
        phi_new, vi_report = solve_obstacle_vi(
            self.mass, self.laplacian, w, phi,
            cfg.epsilon, cfg.gamma, cfg.tau,
            tol=cfg.vi_tol, max_sweeps=cfg.vi_max_sweeps)

        return OptState(
            step=state.step + 1,
            phi=phi_new,
            u_bar=u_bar,
            u_hat=u_hat,
            q_hat=q_hat,
            p_bar=p_bar,
            cost=self.evaluate_cost(phi_new, u_hat),
            vi_iterations=vi_report.iterations,
            cg_iterations=rep1.iterations + rep2.iterations
            + rep3.iterations + rep4.iterations,
        )

    def initial_phase(self):
        cfg = self.config
        n = self.mesh.n_vertices
        if cfg.init_kind == "constant":
            return np.full(n, float(cfg.init_value))
        rng = np.random.default_rng(cfg.seed)
        phi = rng.uniform(-cfg.init_amplitude, cfg.init_amplitude, n)
        phi -= phi.mean()
        return np.clip(phi, -1.0, 1.0)

    def run(self, callback=None):
        """Run the full flow; returns the energy trace, field snapshots, and
        the final state.  On solver failure the partial result is attached
        to the raised PipelineError."""
        cfg = self.config
        trace = EnergyTrace()
        snapshots = []
        phi0 = self.initial_phase()
        try:
            u_bar, rep1 = self.solve_stage1(phi0)
            u_hat, rep2 = self.solve_stage2(phi0, u_bar)
        except Exception as exc:
            raise PipelineError(
                f"initial state solve failed: {exc}",
                RunResult(trace, snapshots, None)) from exc
        state = OptState(step=0, phi=phi0, u_bar=u_bar, u_hat=u_hat,
                         cost=self.evaluate_cost(phi0, u_hat),
                         cg_iterations=rep1.iterations + rep2.iterations)
        self._record(trace, snapshots, state)
        if callback is not None:
            callback(state)

        stagnant = 0
        for _ in range(cfg.max_steps):
            previous_cost = state.cost.total
            try:
                state = self.gradient_flow_step(state)
            except Exception as exc:
                raise PipelineError(
                    f"step {state.step + 1} failed: {exc}",
                    RunResult(trace, snapshots, state)) from exc
            self._record(trace, snapshots, state)
            if callback is not None:
                callback(state)
            if abs(state.cost.total - previous_cost) <= cfg.stop_rtol * abs(state.cost.total):
                stagnant += 1
                if stagnant >= cfg.stop_patience:
                    break
            else:
                stagnant = 0
        if snapshots and snapshots[-1][0] != state.step:
            snapshots.append((state.step, state.phi, state.u_bar, state.u_hat))
        return RunResult(trace=trace, snapshots=snapshots, final_state=state)

    def _record(self, trace, snapshots, state):
        cfg = self.config
        trace.append(TraceRow(
            step=state.step,
            time=state.step * cfg.tau,
            cost=state.cost.total,
            target_energy=state.cost.target,
            interface_energy=state.cost.interface,
            vi_iterations=state.vi_iterations,
            cg_iterations=state.cg_iterations,
        ))
        every = cfg.snapshot_every
        if state.step == 0 or (every > 0 and state.step % every == 0):
            snapshots.append((state.step, state.phi, state.u_bar, state.u_hat))


def run(config, callback=None):
    """Build a Pipeline for `config` and run it."""
    return Pipeline(config).run(callback=callback)


def with_overrides(config, **kwargs):
    """dataclasses.replace wrapper, so callers need not import dataclasses."""
    return replace(config, **kwargs)
