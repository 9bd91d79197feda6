class Active extends AbstractDevice {
    void run() {
        try {
            new Idle();
            send("pause");
        } catch (Failure e) {
            new Error();
        }
    }
}
