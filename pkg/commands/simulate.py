import logging
from pathlib import Path

import pandas as pd

from funreg.funcdata import curves_to_frame
from funreg.simgen import NOISE_READINGS, SimConfig, generate_replicate, replicate_seed, run_table1, table1_scenarios
from util.functions import DATA_FORMAT, thread_count, write_frame

from .converters import float_list, positive_int

logger = logging.getLogger(__name__)

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def cmd_simulate(args) -> int:
    """Writes one simulated data set in the curve CSV format, together
    with the true coefficient curves next to it

    :param args: The parsed command-line arguments
    """
    config = SimConfig(n = args.n, G = args.G, rho = args.rho, sigma = args.sigma,
        seed = args.seed, noise_reading = args.noise_reading)

    # Replicate 0 of the scenario, so the file matches the first Monte Carlo draw
    data = generate_replicate(config, replicate_seed(config.seed, 0))
    output = Path(args.output)
    write_frame(output, curves_to_frame(data.curves, data.response), float_format = DATA_FORMAT)

    truth = pd.DataFrame({"t": data.grid.points})
    for predictor, beta in zip(data.curves, data.beta_curves):
        truth[predictor.label] = beta
    beta_path = output.with_name("{}_beta.csv".format(output.stem))
    write_frame(beta_path, truth, float_format = DATA_FORMAT)

    print(output)
    print(beta_path)
    return 0

def cmd_table1(args) -> int:
    """Runs the Monte Carlo scenarios and writes one metrics row per scenario

    :param args: The parsed command-line arguments
    """
    readings = NOISE_READINGS if args.noise_reading == "both" else (args.noise_reading,)
    scenarios = table1_scenarios(replicates = args.replicates, seed = args.seed,
        noise_readings = readings, rhos = args.rho, sigmas = args.sigma)
    table = run_table1(scenarios, workers = args.workers or thread_count())

    if args.output:
        write_frame(args.output, table)
        print(args.output)
    else:
        print(table.to_csv(index = False, float_format = "%.10g", lineterminator = "\n"), end = "")
    return 0

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def setup(subparsers):
    """Adds the simulate and table1 subcommands

    :param subparsers: The subcommand group of the main parser
    """
    parser = subparsers.add_parser("simulate", help = "write one simulated data set")
    parser.add_argument("--rho", type = float, default = 0.0, help = "predictor correlation")
    parser.add_argument("--sigma", type = float, default = 0.1, help = "noise level")
    parser.add_argument("--noise-reading", choices = NOISE_READINGS, default = "variance",
        help = "whether sigma is the noise standard deviation or its variance")
    parser.add_argument("--n", type = positive_int, default = 100)
    parser.add_argument("--G", type = positive_int, default = 500)
    parser.add_argument("--seed", type = int, default = 0)
    parser.add_argument("--output", default = "simulated.csv", help = "CSV of responses and curves")
    parser.set_defaults(command = cmd_simulate)

    parser = subparsers.add_parser("table1", help = "run the Monte Carlo scenarios")
    parser.add_argument("--replicates", type = positive_int, default = 500)
    parser.add_argument("--seed", type = int, default = 0)
    parser.add_argument("--noise-reading", choices = NOISE_READINGS + ("both",), default = "variance",
        help = "read sigma as the noise variance, its standard deviation, or run both")
    parser.add_argument("--rho", type = float_list, default = [0.0, 0.2, 0.5])
    parser.add_argument("--sigma", type = float_list, default = [0.1, 0.3])
    parser.add_argument("--output", help = "metrics CSV; stdout when not given")
    parser.add_argument("--workers", type = positive_int, help = "threads for the replicate loop")
    parser.set_defaults(command = cmd_table1)
