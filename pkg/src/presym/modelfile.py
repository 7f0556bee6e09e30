"""Line-oriented model files: ``key = value`` with ``#`` comments.

See ``docs/model-format.md`` for the grammar.  :func:`loads` returns a
:class:`ModelSource` (the parsed declarations); :meth:`ModelSource.build`
turns it into a :class:`~presym.models.Model`.  :func:`dumps` writes a model
back out so that loading it again gives identical systems.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import re

from .cartan import Chart, VectorField, parse_form
from .models import Model, conformal_sampler, lagrangian_data
from .presymp import PresympSystem
from .symexpr import ParseError, format_rational, parse

__all__ = ["ModelFileError", "ModelSource", "loads", "load", "dumps", "SAMPLERS"]


class ModelFileError(ValueError):
    def __init__(self, message, line=None, column=None):
        where = f"line {line}" + (f", column {column}" if column is not None else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.column = column


SAMPLERS = {"null-plane": conformal_sampler}

_SINGLE = {
    "name", "coordinates", "parameters", "laurent", "velocities", "lagrangian", "omega",
    "hamiltonian", "time", "theta", "stage", "sode", "sampler", "parameter_values",
    "description",
}
_NAMED = {"generator", "bracket", "constant", "pair"}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class ModelSource:
    """Raw declarations of a model file (values kept as text, with line numbers)."""

    values: dict = field(default_factory=dict)  # key -> (text, line)
    generators: list = field(default_factory=list)  # (name, text, line)
    brackets: list = field(default_factory=list)  # (name_i, name_j, text, line)
    constants: list = field(default_factory=list)  # (name, text, line)
    pairs: list = field(default_factory=list)  # (name, text, line)

    def get(self, key, default=None):
        v = self.values.get(key)
        return v[0] if v else default

    def line(self, key):
        v = self.values.get(key)
        return v[1] if v else None

    # building ----------------------------------------------------------------

    def _names(self, key):
        text = self.get(key, "")
        names = text.replace(",", " ").split()
        for n in names:
            if not _NAME.match(n):
                raise ModelFileError(f"bad name {n!r} in {key}", self.line(key))
        return tuple(names)

    def _poly(self, chart, key, text=None, line=None):
        text = self.get(key) if text is None else text
        try:
            return parse(text, chart.variables, chart.laurent)
        except ParseError as exc:
            raise ModelFileError(f"{key}: {exc}", line or self.line(key),
                                 None if exc.position is None else exc.position + 1) from None

    def _form(self, chart, key, text=None, line=None):
        text = self.get(key) if text is None else text
        try:
            return parse_form(text, chart)
        except ParseError as exc:
            raise ModelFileError(f"{key}: {exc}", line or self.line(key),
                                 None if exc.position is None else exc.position + 1) from None

    def raw_system(self):
        """(chart, omega, hamiltonian, theta, extras) without the closedness check."""
        name = self.get("name", "model")
        params = self._names("parameters")
        laurent = self._names("laurent") if "laurent" in self.values else params
        coords = self._names("coordinates")
        if not coords:
            raise ModelFileError("missing 'coordinates'")
        extras = {}
        if "lagrangian" in self.values:
            if "omega" in self.values:
                raise ModelFileError("give either 'lagrangian' or 'omega', not both", self.line("omega"))
            pairs = []
            for item in self.get("velocities", "").split(","):
                item = item.strip()
                if not item:
                    continue
                if ":" not in item:
                    raise ModelFileError(f"velocity pair {item!r} must read position:velocity",
                                         self.line("velocities"))
                q, v = (s.strip() for s in item.split(":", 1))
                pairs.append((q, v))
            pos = tuple(q for q, _ in pairs)
            vel = tuple(v for _, v in pairs)
            if set(pos) != set(coords) or len(pos) != len(coords):
                raise ModelFileError("every coordinate needs exactly one velocity",
                                     self.line("velocities"))
            chart = Chart(name, pos + vel + params, params, laurent)
            L = self._poly(chart, "lagrangian")
            theta_L, omega, H = lagrangian_data(chart, pos, vel, L)
            extras.update(lagrangian=L, positions=pos, velocities=vel, theta_L=theta_L)
            if "hamiltonian" in self.values:
                raise ModelFileError("a Lagrangian model gets its energy from the Lagrangian",
                                     self.line("hamiltonian"))
        else:
            if "omega" not in self.values:
                raise ModelFileError("missing 'omega' (or 'lagrangian')")
            time = self.get("time")
            chart = Chart(name, coords + params, params, laurent)
            omega = self._form(chart, "omega")
            H = self._poly(chart, "hamiltonian") if "hamiltonian" in self.values else chart.zero()
            if time:
                extras["time"] = time
        theta = None
        if "theta" in self.values:
            if self.get("theta") == "lagrangian":
                if "theta_L" not in extras:
                    raise ModelFileError("'theta = lagrangian' needs a Lagrangian", self.line("theta"))
                theta = extras["theta_L"]
            else:
                theta = None  # parsed on the final chart in build()
        return chart, omega, H, theta, extras

    def build(self):
        from .momred import ActionSpec, build_time_extended

        chart, omega, H, theta, extras = self.raw_system()
        pv = {}
        for item in self.get("parameter_values", "").split(","):
            if item.strip():
                k, _, v = item.partition("=")
                try:
                    pv[k.strip()] = Fraction(v.strip())
                except ValueError:
                    raise ModelFileError(f"bad parameter value {item!r}",
                                         self.line("parameter_values")) from None
        time_ext = None
        if "time" in extras:
            sys = build_time_extended(omega, H, time=extras["time"], name=chart.name)
            time_ext = (omega, H)
            chart = sys.chart
        else:
            sys = PresympSystem(chart, omega, H, name=chart.name, parameter_values=pv)
        if "theta" in self.values and theta is None:
            theta = self._form(chart, "theta")
        gens = []
        for gname, text, line in self.generators:
            comps = {}
            for part in text.split(";"):
                part = part.strip()
                if not part:
                    continue
                if ":" not in part:
                    raise ModelFileError(f"generator component {part!r} must read coord: expr", line)
                var, expr = (s.strip() for s in part.split(":", 1))
                if var not in chart.coords:
                    raise ModelFileError(f"generator {gname}: {var!r} is not a coordinate", line)
                comps[var] = self._poly(chart, f"generator {gname}", expr, line)
            gens.append((gname, VectorField(chart, comps)))
        action = None
        if gens:
            names = [g for g, _ in gens]
            structure = None
            if self.brackets:
                structure = {}
                for a, b, text, line in self.brackets:
                    if a not in names or b not in names:
                        raise ModelFileError(f"bracket of unknown generators {a}, {b}", line)
                    i, j = names.index(a), names.index(b)
                    combo = parse(text, tuple(names))
                    coeffs = {}
                    for exps, c in combo.terms():
                        if sum(exps) != 1:
                            raise ModelFileError("bracket must be a linear combination of generators", line)
                        coeffs[exps.index(1)] = c
                    if i > j:
                        i, j = j, i
                        coeffs = {k: -c for k, c in coeffs.items()}
                    structure[(i, j)] = coeffs
            consts = {}
            for gname, text, line in self.constants:
                try:
                    consts[gname] = Fraction(text)
                except ValueError:
                    raise ModelFileError(f"constant for {gname} must be rational", line) from None
            try:
                action = ActionSpec(chart, gens, structure_constants=structure,
                                    exact_one_form=theta, constants=consts)
            except ValueError as exc:
                raise ModelFileError(str(exc)) from None
        sampler = None
        hint = self.get("sampler")
        if hint and hint != "none":
            kind, *args = hint.split()
            if kind not in SAMPLERS:
                raise ModelFileError(f"unknown sampler {kind!r}", self.line("sampler"))
            kwargs = {}
            for a in args:
                k, _, v = a.partition("=")
                kwargs[k] = int(v)
            sampler = SAMPLERS[kind](**kwargs)
        pairing = {}
        if extras.get("velocities"):
            pairing = dict(zip(extras["velocities"], extras["positions"]))
        stage = self.get("stage", "system")
        if stage not in ("system", "ambient"):
            raise ModelFileError("stage must be 'system' or 'ambient'", self.line("stage"))
        sode = self.get("sode", "off")
        if sode not in ("on", "off"):
            raise ModelFileError("sode must be 'on' or 'off'", self.line("sode"))
        kernel_pairing = {g: self._poly(chart, f"pair {g}", t, line) for g, t, line in self.pairs}
        return Model(
            chart.name, sys, action, sode_pairing=pairing, sampler=sampler,
            lagrangian=extras.get("lagrangian"), positions=extras.get("positions", ()),
            velocities=extras.get("velocities", ()), theta=theta, stage=stage,
            sode=sode == "on", time_extension=time_ext,
            description=self.get("description", ""), kernel_pairing=kernel_pairing,
        )


def loads(text):
    src = ModelSource()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelFileError("expected 'key = value'", lineno, 1)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        words = key.split()
        if not words:
            raise ModelFileError("missing key", lineno, 1)
        head = words[0]
        if head in _NAMED:
            if head == "bracket":
                if len(words) != 3:
                    raise ModelFileError("bracket needs two generator names", lineno)
                src.brackets.append((words[1], words[2], value, lineno))
                continue
            if len(words) != 2:
                raise ModelFileError(f"{head} needs one name", lineno)
            target = {"generator": src.generators, "constant": src.constants, "pair": src.pairs}[head]
            if head == "generator" and any(g == words[1] for g, _, _ in src.generators):
                raise ModelFileError(f"duplicate generator {words[1]!r}", lineno)
            target.append((words[1], value, lineno))
            continue
        if head not in _SINGLE or len(words) != 1:
            raise ModelFileError(f"unknown key {key!r}", lineno, 1)
        if head in src.values:
            raise ModelFileError(f"duplicate key {head!r}", lineno, 1)
        src.values[head] = (value, lineno)
    return src


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read()).build()


def dumps(model):
    """Model file text for ``model`` (built-in or loaded)."""
    sys = model.system
    out = [f"name = {model.name}"]
    if model.description:
        out.append(f"description = {model.description}")
    chart = sys.chart
    if model.time_extension is not None:
        omega_P, h = model.time_extension
        time = getattr(sys, "time", "t")
        coords = [x for x in omega_P.chart.coords if x != time]
        out.append(f"coordinates = {' '.join(coords)}")
        if chart.parameters:
            out.append(f"parameters = {' '.join(chart.parameters)}")
            out.append(f"laurent = {' '.join(chart.laurent)}")
        out.append(f"time = {time}")
        out.append(f"omega = {_form_text(omega_P)}")
        out.append(f"hamiltonian = {h}")
    elif model.lagrangian is not None:
        out.append(f"coordinates = {' '.join(model.positions)}")
        out.append("velocities = " + ", ".join(f"{q}:{v}" for q, v in zip(model.positions, model.velocities)))
        if chart.parameters:
            out.append(f"parameters = {' '.join(chart.parameters)}")
            out.append(f"laurent = {' '.join(chart.laurent)}")
        out.append(f"lagrangian = {model.lagrangian}")
    else:
        out.append(f"coordinates = {' '.join(chart.coords)}")
        if chart.parameters:
            out.append(f"parameters = {' '.join(chart.parameters)}")
            out.append(f"laurent = {' '.join(chart.laurent)}")
        out.append(f"omega = {_form_text(sys.omega)}")
        out.append(f"hamiltonian = {sys.hamiltonian}")
    if sys.parameter_values:
        out.append("parameter_values = " + ", ".join(
            f"{k}={format_rational(v)}" for k, v in sys.parameter_values.items()))
    if model.theta is not None:
        if model.lagrangian is not None:
            out.append("theta = lagrangian")
        else:
            out.append(f"theta = {_form_text(model.theta)}")
    out.append(f"stage = {model.stage}")
    out.append(f"sode = {'on' if model.sode else 'off'}")
    hint = getattr(model.sampler, "hint", None)
    if hint:
        out.append(f"sampler = {hint}")
    if model.action is not None:
        for name, X in model.action.generators:
            parts = "; ".join(f"{k}: {X[k]}" for k in X.chart.coords if X[k])
            out.append(f"generator {name} = {parts}")
        if model.action.declared_constants:
            names = model.action.names
            for (i, j), coeffs in sorted(model.action.structure_constants.items()):
                combo = " + ".join(f"{format_rational(c)}*{names[k]}" for k, c in sorted(coeffs.items()))
                out.append(f"bracket {names[i]} {names[j]} = {combo or '0'}")
        for name, c in model.action.constants.items():
            out.append(f"constant {name} = {format_rational(c)}")
    for name, f in model.kernel_pairing.items():
        out.append(f"pair {name} = {f}")
    return "\n".join(out) + "\n"


def _form_text(form):
    """Printer output that parse_form reads back (explicit '*' before differentials)."""
    terms = []
    for idx, c in sorted(form.components.items()):
        basis = form.basis_str(idx)
        if c.is_constant():
            v = c.constant_value()
            if v == 1:
                terms.append(("+", basis))
            elif v == -1:
                terms.append(("-", basis))
            else:
                sign = "-" if v < 0 else "+"
                terms.append((sign, f"{format_rational(abs(v))}*{basis}"))
        else:
            terms.append(("+", f"({c})*{basis}"))
    if not terms:
        return "0"
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text
