import csv
import io
import json
from typing import Any, Dict, List

from opmean.v1._shared.schemas import Command, EnsembleReport, OutputFormat


class ReportMapper:
    """
    Serializes an EnsembleReport.

    JSON is the full report under the "schema" key; CSV flattens the part of
    the report that matters for the command (sweep rows, cases, means or the
    example comparison).
    """

    def to_json(self, report: EnsembleReport, timing: bool = False) -> str:
        exclude = None if timing else {"runtime"}
        return report.model_dump_json(by_alias=True, exclude=exclude, indent=2)

    def _sweep_rows(self, report: EnsembleReport) -> List[Dict[str, Any]]:
        names = list(report.rows[0].params) if report.rows else []
        width = max((len(row.gaps) for row in report.rows), default=0)
        rows = []
        for row in report.rows:
            record: Dict[str, Any] = {name: row.params.get(name) for name in names}
            record["f"] = row.f or ""
            record["worst_margin"] = row.worst_margin
            for k in range(width):
                record[f"gap_{k}"] = row.gaps[k] if k < len(row.gaps) else None
            record["holds"] = row.holds
            rows.append(record)
        return rows

    def _case_rows(self, report: EnsembleReport) -> List[Dict[str, Any]]:
        return [
            {
                "index": case.index,
                "trial": case.trial,
                "id": case.id,
                "f": case.f or "",
                "params": json.dumps(case.params, sort_keys=True),
                "dims": case.dims,
                "worst_margin": case.worst_margin if case.margins else None,
                "holds": case.holds,
                "error": case.error or "",
            }
            for case in report.cases
        ]

    def _mean_rows(self, report: EnsembleReport) -> List[Dict[str, Any]]:
        rows = []
        for result in report.means:
            for i in range(result.dim):
                for j in range(result.dim):
                    rows.append(
                        {
                            "kind": result.kind,
                            "weight": result.weight,
                            "i": i,
                            "j": j,
                            "re": result.re[i][j],
                            "im": result.im[i][j] if result.im is not None else 0.0,
                        }
                    )
        return rows

    def _example_rows(self, report: EnsembleReport) -> List[Dict[str, Any]]:
        return [row.model_dump() for row in report.examples]

    def to_csv(self, report: EnsembleReport) -> str:
        if report.command == Command.SWEEP:
            rows = self._sweep_rows(report)
        elif report.command == Command.VERIFY:
            rows = self._case_rows(report)
        elif report.command == Command.MEAN:
            rows = self._mean_rows(report)
        else:
            rows = self._example_rows(report)

        buffer = io.StringIO()
        if rows:
            writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return buffer.getvalue()

    def render(self, report: EnsembleReport, output_format: OutputFormat, timing: bool = False) -> str:
        if OutputFormat(output_format) == OutputFormat.CSV:
            return self.to_csv(report)
        return self.to_json(report, timing)


# Create a singleton instance
report_mapper = ReportMapper()


def render_report(report: EnsembleReport, output_format: OutputFormat, timing: bool = False) -> str:
    return report_mapper.render(report, output_format, timing)
