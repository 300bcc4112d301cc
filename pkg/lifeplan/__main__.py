import sys

from lifeplan.cli.main import main

sys.exit(main())
