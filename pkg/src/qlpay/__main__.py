from qlpay.cli import main

raise SystemExit(main())
