class Error extends State {
    void reset() {
        if (recoverable) {
            new Idle();
        } else {
            new Heating();
            send("retry");
        }
    }
}
