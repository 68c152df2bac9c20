import json
from typing import Any, Optional

from sympy.polys.domains import QQ

from models import (AnalysisReport, CheckResult, CurveDualityReport, CurveFiltrationReport, FaceResult,
                    HodgeSpectrum, NondegeneracyReport, Witness)
from polytope import NewtonPolytope


class ReportManager:

    @staticmethod
    def format_rational(value: Any) -> str:
        value = QQ.convert(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    @staticmethod
    def format_point(point: Any) -> str:
        return "(" + ",".join(ReportManager.format_coordinate(v) for v in point) + ")"

    @staticmethod
    def format_coordinate(value: Any) -> str:
        if isinstance(value, int):
            return str(value)
        return ReportManager.format_rational(value)

    @staticmethod
    def input_to_dict(poly: str, var_names: tuple[str, ...], nvars: int) -> dict:
        return {
            "poly": poly,
            "vars": list(var_names),
            "n": nvars
        }

    @staticmethod
    def polytope_to_dict(polytope: NewtonPolytope, nvol: Optional[int], origin_interior: bool) -> dict:
        return {
            "vertices": [list(v) for v in polytope.vertices],
            "facets": [{"normal": list(u), "offset": c} for u, c in polytope.facets],
            "nvol": nvol,
            "origin_interior": origin_interior,
            "dim": polytope.dim
        }

    @staticmethod
    def witness_to_dict(witness: Witness) -> dict:
        return {
            "point": [ReportManager.format_coordinate(v) for v in witness.coordinates],
            "field": "QQ" if witness.is_rational else f"GF({witness.field})",
            "face": witness.face_label
        }

    @staticmethod
    def face_to_dict(result: FaceResult) -> dict:
        return {
            "face": result.face.label(),
            "dim": result.face.dim,
            "status": result.status,
            "certified": result.certified,
            "modular": {str(p): status for p, status in result.modular.items()}
        }

    @staticmethod
    def nondegeneracy_to_dict(report: NondegeneracyReport) -> dict:
        data = {
            "verdict": report.verdict,
            "certified": report.certified,
        }
        if report.witness is not None:
            data["witness"] = ReportManager.witness_to_dict(report.witness)
        data["faces"] = [ReportManager.face_to_dict(r) for r in report.faces]
        data["primes"] = list(report.primes)
        return data

    @staticmethod
    def spectrum_to_list(spectrum: HodgeSpectrum) -> list[dict]:
        return [{"lambda": ReportManager.format_rational(level), "mult": mult} for level, mult in spectrum.entries]

    @staticmethod
    def dims_to_list(dims: list[tuple[Any, int]]) -> list[dict]:
        return [{"lambda": ReportManager.format_rational(level), "dim": dim} for level, dim in dims]

    @staticmethod
    def duality_to_dict(duality: CurveDualityReport) -> dict:
        return {
            "graded": ReportManager.dims_to_list(sorted(duality.graded.items())),
            "compact_graded_dual": ReportManager.dims_to_list(sorted(duality.compact_graded_dual.items())),
            "passed": duality.passed
        }

    @staticmethod
    def curve_to_dict(curve: CurveFiltrationReport) -> dict:
        data = {
            "jumps": [ReportManager.format_rational(level) for level in curve.jumps],
            "irregular": ReportManager.dims_to_list(curve.irregular),
            "deligne": ReportManager.dims_to_list(curve.deligne),
            "compact": ReportManager.dims_to_list(curve.compact),
            "toric": ReportManager.dims_to_list(curve.toric),
            "agreement": {ReportManager.format_rational(level): ok for level, ok in curve.agreement.items()},
            "subspace_agreement": curve.subspace_agreement,
            "deligne_injective": curve.deligne_injective,
            "ambient_level": curve.ambient_level,
            "truncation": curve.truncation
        }
        if curve.duality is not None:
            data["duality"] = ReportManager.duality_to_dict(curve.duality)
        return data

    @staticmethod
    def checks_to_dict(checks: dict[str, CheckResult]) -> dict:
        return {name: check.status for name, check in checks.items()}

    @staticmethod
    def report_to_dict(report: AnalysisReport) -> dict:
        data = {"input": ReportManager.input_to_dict(report.poly, report.var_names, report.nvars),
                "polytope": ReportManager.polytope_to_dict(report.polytope, report.nvol, report.origin_interior)}
        if report.nondegeneracy is not None:
            data["nondegeneracy"] = ReportManager.nondegeneracy_to_dict(report.nondegeneracy)
        if report.betti is not None:
            data["betti"] = list(report.betti)
        data["spectrum"] = {route: ReportManager.spectrum_to_list(spectrum)
                            for route, spectrum in report.spectra.items()}
        data["checks"] = ReportManager.checks_to_dict(report.checks)
        data["warnings"] = list(report.warnings)
        data["timing_ms"] = report.timing_ms
        if report.curve is not None:
            data["curve"] = ReportManager.curve_to_dict(report.curve)
        return data

    @staticmethod
    def to_json(data: dict) -> str:
        return json.dumps(data, indent=2, ensure_ascii=False)

    @staticmethod
    def spectrum_line(route: str, spectrum: HodgeSpectrum) -> str:
        entries = ", ".join(f"({ReportManager.format_rational(level)}, {mult})" for level, mult in spectrum.entries)
        suffix = "" if spectrum.supported else " [unsupported]"
        return f"spectrum ({route}, H^{spectrum.degree}): {{{entries}}}{suffix}"

    @staticmethod
    def nondegeneracy_line(report: NondegeneracyReport) -> str:
        if report.verdict == "degenerate":
            parts = ["degenerate"]
            witness = report.witness
            face = witness.face_label if witness else next(r.face.label() for r in report.faces
                                                           if r.status == "nonempty")
            parts.append(f"face {face}")
            if witness is not None:
                field = "" if witness.is_rational else f" over GF({witness.field})"
                parts.append(f"witness {ReportManager.format_point(witness.coordinates)}{field}")
            return ", ".join(parts)
        if report.certified:
            return f"{report.verdict} (certified)"
        primes = ", ".join(str(p) for p in report.primes)
        return f"{report.verdict} (primes {primes})" if primes else report.verdict

    @staticmethod
    def polytope_lines(polytope: NewtonPolytope, nvol: Optional[int], origin_interior: bool) -> list[str]:
        vertices = " ".join(ReportManager.format_point(v) for v in polytope.vertices)
        lines = [f"dim {polytope.dim}, vertices {vertices}"]
        if nvol is not None:
            lines.append(f"nvol {nvol}")
        lines.append(f"origin interior: {'yes' if origin_interior else 'no'}")
        return lines

    @staticmethod
    def curve_lines(curve: CurveFiltrationReport) -> list[str]:
        def dims(values):
            return ", ".join(f"({ReportManager.format_rational(level)}, {d})" for level, d in values)

        lines = [f"curve jumps: {', '.join(ReportManager.format_rational(level) for level in curve.jumps)}",
                 f"  F (irregular): {dims(curve.irregular)}",
                 f"  𝔉 (Deligne): {dims(curve.deligne)}  [ambient M = {curve.ambient_level}]",
                 f"  toric:         {dims(curve.toric)}",
                 f"  compact:       {dims(curve.compact)}",
                 f"  agreement: {all(curve.agreement.values())}, subspaces: {curve.subspace_agreement}, "
                 f"injective: {curve.deligne_injective}"]
        if curve.duality is not None:
            lines.append(f"  duality: {curve.duality.passed}")
        return lines

    @staticmethod
    def check_line(name: str, check: CheckResult) -> str:
        status = str(check.status).lower() if isinstance(check.status, bool) else check.status
        return f"check {name}: {status}" + (f" ({check.detail})" if check.detail else "")

    @staticmethod
    def render_text(report: AnalysisReport) -> str:
        lines = [f"f = {report.poly}  (n = {report.nvars}, vars {','.join(report.var_names)})"]
        lines += ReportManager.polytope_lines(report.polytope, report.nvol, report.origin_interior)
        if report.nondegeneracy is not None:
            lines.append("nondegeneracy: " + ReportManager.nondegeneracy_line(report.nondegeneracy))
        if report.betti is not None:
            lines.append("betti: " + " ".join(str(b) for b in report.betti))
        for route, spectrum in report.spectra.items():
            lines.append(ReportManager.spectrum_line(route, spectrum))
        for name, check in report.checks.items():
            lines.append(ReportManager.check_line(name, check))
        if report.curve is not None:
            lines += ReportManager.curve_lines(report.curve)
        for warning in report.warnings:
            lines.append(f"warning: {warning}")
        if report.timing_ms is not None:
            lines.append("timing (ms): " + ", ".join(f"{k} {v}" for k, v in report.timing_ms.items()))
        return "\n".join(lines) + "\n"
