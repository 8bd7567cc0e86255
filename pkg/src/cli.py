import argparse
import sys

from src.harness import REPORT_FORMATS
from src.utils import parse_float_list, print_json, print_table

from . import porcelain


class Command:
    name = ""
    actions = ()

    def parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=f"inviscid {self.name}")
        parser.add_argument("action", choices=self.actions)
        return parser

    def run(self, args):
        raise NotImplementedError


def add_theta_options(parser, M=True):
    parser.add_argument(
        "--theta",
        required=True,
        help="Growth profile: const:C, iterlog:m, pow:a or table:PATH.",
    )
    parser.add_argument("--p0", type=float, help="Lower end of the p range (family default when omitted).")
    if M:
        parser.add_argument("--M", type=float, default=1.0, help="Upper bound of the argument of beta.")


class CmdBeta(Command):
    name = "beta"
    actions = ("eval",)

    def run(self, args):
        parser = self.parser()
        add_theta_options(parser)
        parser.add_argument("--x", type=float, required=True)
        parser.add_argument("--eps", type=float, help="Also report beta_eps at this eps.")
        args = parser.parse_args(args)
        print_json(porcelain.beta_eval(args.M, args.theta, args.p0, args.x, args.eps))


class CmdPsi(Command):
    name = "psi"
    actions = ("eval",)

    def run(self, args):
        parser = self.parser()
        add_theta_options(parser, M=False)
        parser.add_argument("--x", type=float, required=True)
        args = parser.parse_args(args)
        print_json(porcelain.psi_eval(args.theta, args.p0, args.x))


class CmdAdmissible(Command):
    name = "admissible"
    actions = ("check",)

    def run(self, args):
        parser = self.parser()
        add_theta_options(parser)
        parser.add_argument("--decades", type=int, default=12, help="Decades of cutoffs, at least 6.")
        parser.add_argument("--threshold", type=float, default=0.05, help="Growth threshold.")
        args = parser.parse_args(args)
        print_json(porcelain.admissible_check(args.theta, args.p0, args.M, args.decades, args.threshold))


class CmdSufficient(Command):
    name = "sufficient"
    actions = ("check",)

    def run(self, args):
        parser = self.parser()
        add_theta_options(parser, M=False)
        parser.add_argument("--threshold", type=float, default=0.05, help="Growth threshold.")
        args = parser.parse_args(args)
        print_json(porcelain.sufficient_check(args.theta, args.p0, args.threshold))


class CmdRate(Command):
    name = "rate"
    actions = ("bound", "table")

    def run(self, args):
        parser = self.parser()
        add_theta_options(parser)
        parser.add_argument("--T", type=float, required=True, help="Time horizon.")
        parser.add_argument("--R", type=float, required=True, help="Energy constant R.")
        parser.add_argument("--nu", type=float, help="Viscosity (bound).")
        parser.add_argument("--t", type=float, help="Time, default T (bound).")
        parser.add_argument("--nu-list", type=parse_float_list, help="Comma-separated viscosities (table).")
        parser.add_argument("--times", type=parse_float_list, help="Comma-separated times (table).")
        args = parser.parse_args(args)

        if args.action == "bound":
            if args.nu is None:
                parser.error("rate bound requires --nu")
            print_json(porcelain.rate_bound(args.theta, args.M, args.p0, args.T, args.R, args.nu, args.t))
        else:
            if not args.nu_list:
                parser.error("rate table requires --nu-list")
            rows = porcelain.rate_table(args.theta, args.M, args.p0, args.T, args.R, args.nu_list, args.times)
            print_table(["nu", "t", "bound"], rows)


class CmdSim(Command):
    name = "sim"
    actions = ("run",)

    def run(self, args):
        parser = self.parser()
        parser.add_argument("--config", required=True, help="Simulation config file.")
        parser.add_argument("--output", default="run", help="Directory for diagnostics and snapshots.")
        parser.add_argument("--label", default="run", help="Prefix of the written files.")
        args = parser.parse_args(args)
        print_json(porcelain.sim_run(args.config, args.output, args.label))


class CmdSweep(Command):
    name = "sweep"
    actions = ("run", "report")

    def run(self, args):
        parser = self.parser()
        parser.add_argument("--config", help="Sweep config file (run).")
        parser.add_argument("--dir", help="Directory of a finished sweep (report).")
        parser.add_argument("--format", choices=REPORT_FORMATS, default="json")
        parser.add_argument("--output", help="Output directory, overriding the config / --dir.")
        args = parser.parse_args(args)

        if args.action == "run":
            if args.config is None:
                parser.error("sweep run requires --config")
            print_json(porcelain.sweep_run(args.config, args.output))
            return

        if args.dir is None:
            parser.error("sweep report requires --dir")
        report = porcelain.sweep_report(args.dir, args.format, args.output)
        if args.format == "csv":
            sys.stdout.write(report)
        elif args.format == "json":
            print_json(report)
        else:
            print_json({"paths": report})


commands = {
    "beta": CmdBeta,
    "psi": CmdPsi,
    "admissible": CmdAdmissible,
    "sufficient": CmdSufficient,
    "rate": CmdRate,
    "sim": CmdSim,
    "sweep": CmdSweep,
}
