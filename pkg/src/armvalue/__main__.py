import sys

from armvalue.cli import main

sys.exit(main())
