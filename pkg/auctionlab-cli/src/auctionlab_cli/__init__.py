# Auction Lab CLI - gen, flow, certify, lp, protocol, disj and verify commands
# Includes the check reference generator behind `verify --list`

__version__ = "0.1.0"
