import sys

from bellsurvey.cli import main

sys.exit(main())
