from util.tecator import TECATOR_URL, download_tecator_sync, parse_tecator, write_tecator

from .converters import positive_int

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

def cmd_download_tecator(args) -> int:
    """Downloads the spectrometrics data and writes it in the curve CSV format

    :param args: The parsed command-line arguments
    """
    spectra, fat = parse_tecator(download_tecator_sync(args.url, timeout = args.timeout), samples = args.samples)
    write_tecator(args.output, spectra, fat)
    print(args.output)
    return 0

def setup(subparsers):
    parser = subparsers.add_parser("download-tecator", help = "download the spectrometrics data set")
    parser.add_argument("--output", default = "tecator.csv")
    parser.add_argument("--url", default = TECATOR_URL)
    parser.add_argument("--timeout", type = float, default = 60)
    parser.add_argument("--samples", type = positive_int, default = 215)
    parser.set_defaults(command = cmd_download_tecator)
